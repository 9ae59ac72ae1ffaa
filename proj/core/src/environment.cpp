#include "aorl/environment.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "aorl/random.hpp"

namespace aorl {

void EnvConfig::validate() const {
  optics.validate();
  turbulence.validate();
  dm.validate();
  if (episode_length < 1) throw ConfigError("episode length must be positive");
  if (!allow_any_episode_length && episode_length != 30 && episode_length != 50 &&
      episode_length != 100) {
    throw ConfigError("episode length must be 30, 50 or 100 (set allow_any_episode_length)");
  }
  if (!(detector_window_widths > 0.0)) throw ConfigError("detector window must be positive");
}

EnvConfig EnvConfig::standard(double d_over_r0, std::uint64_t seed) {
  EnvConfig cfg;
  cfg.turbulence = TurbulenceConfig::from_severity(d_over_r0, cfg.optics.aperture_diameter, seed);
  cfg.dm = DMConfig::for_aperture(cfg.optics.aperture_diameter);
  cfg.seed = seed;
  return cfg;
}

EnvComponents::EnvComponents(const EnvConfig& cfg)
    : bench(cfg.optics, cfg.detector_window_widths), dm(cfg.dm, cfg.optics.pupil) {}

bool EnvComponents::compatible_with(const EnvConfig& cfg) const {
  const auto& a = bench.config();
  const auto& d = dm.config();
  return a.wavelength == cfg.optics.wavelength &&
         a.aperture_diameter == cfg.optics.aperture_diameter && a.pupil == cfg.optics.pupil &&
         a.focal == cfg.optics.focal && d.n_across == cfg.dm.n_across &&
         d.pitch == cfg.dm.pitch && d.stroke_limit == cfg.dm.stroke_limit &&
         d.influence_sigma == cfg.dm.influence_sigma && d.model == cfg.dm.model;
}

Environment::Environment(EnvConfig cfg, std::shared_ptr<const EnvComponents> shared)
    : cfg_(std::move(cfg)), components_(std::move(shared)) {
  cfg_.validate();
  if (!components_) {
    components_ = std::make_shared<const EnvComponents>(cfg_);
  } else if (!components_->compatible_with(cfg_)) {
    throw ConfigError("shared environment components do not match the config");
  }
  if (cfg_.screen_mode == ScreenMode::fixed_per_run) {
    fixed_screen_ = screen_for_episode(0);
  }
}

PhaseScreen Environment::screen_for_episode(std::int64_t episode_index) const {
  TurbulenceConfig t = cfg_.turbulence;
  t.seed = cfg_.screen_mode == ScreenMode::fixed_per_run
               ? cfg_.seed
               : derive_seed(cfg_.seed, static_cast<std::uint64_t>(episode_index));
  return generate_screen(cfg_.optics.pupil, t, cfg_.optics.aperture_diameter);
}

StepInfo Environment::info_from(const BenchReading& r, bool had_nan) const {
  return {r.strehl_direct, r.strehl_mahajan, r.residual_rms, had_nan};
}

ResetResult Environment::reset(std::int64_t episode_index) {
  state_.screen = fixed_screen_ ? *fixed_screen_ : screen_for_episode(episode_index);
  state_.command = ActuatorCommand::zero(cfg_.dm.n_actuators());
  state_.step_index = 0;
  state_.residual = state_.screen;
  last_ = components_->bench.measure(state_.residual);
  started_ = true;
  return {last_.observation, info_from(last_, false)};
}

StepResult Environment::step(std::span<const double> action) {
  if (!started_) throw ProtocolError("step() before reset()");
  if (state_.step_index >= cfg_.episode_length) throw ProtocolError("step() after episode end");
  if (static_cast<int>(action.size()) != action_size()) {
    throw DimensionError("action length does not match the actuator count");
  }
  const Eigen::Map<const Eigen::VectorXd> raw(action.data(),
                                              static_cast<Eigen::Index>(action.size()));
  ClampResult clamped = clamp_command(raw);
  state_.command = std::move(clamped.command);
  state_.residual =
      state_.screen + components_->dm.phase(state_.command, cfg_.optics.wavelength);
  last_ = components_->bench.measure(state_.residual);
  ++state_.step_index;

  StepResult out;
  out.observation = last_.observation;
  out.reward = last_.strehl(cfg_.reward);
  out.done = state_.step_index == cfg_.episode_length;
  out.info = info_from(last_, clamped.had_nan);
  return out;
}

ActuatorCommand Environment::oracle_command() const {
  if (!started_) throw ProtocolError("oracle_command() before reset()");
  return components_->dm.project_phase(-state_.screen, components_->bench.aperture_mask(),
                                       cfg_.optics.wavelength);
}

TrajectoryLog::TrajectoryLog(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw IoError("cannot open trajectory log: " + path.string());
  out_ << kHeader << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
}

void TrajectoryLog::append(const std::string& run_id, int trial, std::int64_t episode, int step,
                           const StepResult& r, double action_l2) {
  out_ << run_id << ',' << trial << ',' << episode << ',' << step << ',' << r.reward << ','
       << r.info.strehl_direct << ',' << r.observation.q[0] << ',' << r.observation.q[1] << ','
       << r.observation.q[2] << ',' << r.observation.q[3] << ',' << action_l2 << '\n';
  if (!out_) throw IoError("trajectory log write failed");
}

}  // namespace aorl

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "aorl/bench.hpp"
#include "aorl/deformable_mirror.hpp"
#include "aorl/turbulence.hpp"

namespace aorl {

enum class ScreenMode { fixed_per_run, resample_per_episode };

struct EnvConfig {
  TurbulenceConfig turbulence;
  OpticalConfig optics;
  DMConfig dm = DMConfig::for_aperture(0.5);
  int episode_length = 30;
  /// Lengths other than 30, 50 and 100 are rejected unless this is set.
  bool allow_any_episode_length = false;
  ScreenMode screen_mode = ScreenMode::resample_per_episode;
  std::uint64_t seed = 0;
  RewardKind reward = RewardKind::direct;
  double detector_window_widths = 8.0;

  void validate() const;

  /// D = 0.5 m, 1550 nm, 8x8 DM, severity D/r0 (0 means no turbulence).
  static EnvConfig standard(double d_over_r0, std::uint64_t seed);
};

/// The optical train and mirror, built once and shared read-only between
/// environments with the same optics and DM.
struct EnvComponents {
  OpticalBench bench;
  DeformableMirror dm;

  explicit EnvComponents(const EnvConfig& cfg);
  [[nodiscard]] bool compatible_with(const EnvConfig& cfg) const;
};

struct EnvState {
  PhaseScreen screen;      // aberration phi_ab
  ActuatorCommand command;
  int step_index = 0;
  PhaseScreen residual;    // phi_ab + phi_dm(command), kept in sync
};

/// Ground-truth diagnostics; agents only see observation and reward.
struct StepInfo {
  double strehl_direct = 0.0;
  double strehl_mahajan = 0.0;
  double residual_rms = 0.0;
  bool action_had_nan = false;
};

struct StepResult {
  QuadrantObservation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct ResetResult {
  QuadrantObservation observation;
  StepInfo info;  // uncorrected system
};

/// Episodic environment: frozen screen, absolute DM commands, quadrant
/// observation and Strehl reward. Single-threaded; create one per trial.
class Environment {
 public:
  explicit Environment(EnvConfig cfg, std::shared_ptr<const EnvComponents> shared = nullptr);

  /// Flat mirror, screen chosen per screen_mode, step_index = 0.
  ResetResult reset(std::int64_t episode_index);

  /// Absolute positioning: command <- clamp(action). Throws ProtocolError when
  /// the episode is already done or reset() was never called.
  StepResult step(std::span<const double> action);

  [[nodiscard]] const EnvState& state() const { return state_; }
  [[nodiscard]] const EnvConfig& config() const { return cfg_; }
  [[nodiscard]] const EnvComponents& components() const { return *components_; }
  [[nodiscard]] std::shared_ptr<const EnvComponents> shared_components() const {
    return components_;
  }
  [[nodiscard]] bool done() const { return started_ && state_.step_index >= cfg_.episode_length; }

  /// The aberration reset(episode_index) would use.
  [[nodiscard]] PhaseScreen screen_for_episode(std::int64_t episode_index) const;

  /// Reward and diagnostics for the current residual.
  [[nodiscard]] double reward() const { return last_.strehl(cfg_.reward); }
  [[nodiscard]] const BenchReading& last_reading() const { return last_; }

  [[nodiscard]] static constexpr int observation_size() { return 4; }
  [[nodiscard]] int action_size() const { return cfg_.dm.n_actuators(); }

  /// Least-squares projection of -phi_ab onto the DM influence basis for the
  /// current screen.
  [[nodiscard]] ActuatorCommand oracle_command() const;

 private:
  StepInfo info_from(const BenchReading& r, bool had_nan) const;

  EnvConfig cfg_;
  std::shared_ptr<const EnvComponents> components_;
  std::optional<PhaseScreen> fixed_screen_;
  EnvState state_;
  BenchReading last_;
  bool started_ = false;
};

/// Step-level trajectory log. Columns: run_id, trial, episode, step, reward,
/// strehl_direct, q1, q2, q3, q4, action_l2.
class TrajectoryLog {
 public:
  explicit TrajectoryLog(const std::filesystem::path& path);
  void append(const std::string& run_id, int trial, std::int64_t episode, int step,
              const StepResult& result, double action_l2);

  static constexpr const char* kHeader =
      "run_id,trial,episode,step,reward,strehl_direct,q1,q2,q3,q4,action_l2";

 private:
  std::ofstream out_;
};

}  // namespace aorl

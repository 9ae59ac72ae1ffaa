#include "aorl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "aorl/checkpoint.hpp"
#include "aorl/ddpg.hpp"
#include "aorl/manifest.hpp"
#include "aorl/map_io.hpp"
#include "aorl/optics.hpp"
#include "aorl/ppo.hpp"
#include "aorl/sac.hpp"
#include "aorl/svg_chart.hpp"

namespace aorl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string trial_stem(int trial) {
  std::ostringstream s;
  s << "trial_" << std::setw(3) << std::setfill('0') << trial;
  return s.str();
}

std::string screen_mode_name(ScreenMode m) {
  return m == ScreenMode::fixed_per_run ? "fixed_per_run" : "resample_per_episode";
}

ScreenMode screen_mode_from(const std::string& s) {
  if (s == "fixed_per_run" || s == "fixed") return ScreenMode::fixed_per_run;
  if (s == "resample_per_episode" || s == "resample") return ScreenMode::resample_per_episode;
  throw ConfigError("unknown screen mode: " + s);
}

std::string reward_name(RewardKind k) { return k == RewardKind::direct ? "direct" : "mahajan"; }

RewardKind reward_from(const std::string& s) {
  if (s == "direct") return RewardKind::direct;
  if (s == "mahajan") return RewardKind::mahajan;
  throw ConfigError("unknown reward kind: " + s);
}

json train_to_json(const TrainConfig& t) {
  return {{"actor_lr", t.actor_lr},
          {"critic_lr", t.critic_lr},
          {"actor_hidden", t.actor_hidden},
          {"critic_hidden", t.critic_hidden},
          {"extra_hidden_layers", t.extra_hidden_layers},
          {"clip_epsilon", t.clip_epsilon},
          {"temperature_lr", t.temperature_lr},
          {"temperature_min", t.temperature_min},
          {"initial_temperature", t.initial_temperature},
          {"temperature_mode", to_string(t.temperature_mode)},
          {"target_entropy", t.target_entropy},
          {"buffer_size", t.buffer_size},
          {"episodes_per_iteration", t.episodes_per_iteration},
          {"updates_per_iteration", t.updates_per_iteration},
          {"polyak", t.polyak},
          {"gamma", t.gamma},
          {"reward_scaling", to_string(t.reward_scaling)},
          {"batch_size", t.batch_size},
          {"exploration_noise", t.exploration_noise},
          {"warmup_episodes", t.warmup_episodes},
          {"initial_log_std", t.initial_log_std},
          {"policy_output_scale", t.policy_output_scale},
          {"policy_output_gain", t.policy_output_gain},
          {"normalize_per_iteration", t.normalize_per_iteration}};
}

void train_from_json(const json& j, TrainConfig& t) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("actor_lr", t.actor_lr);
  get("critic_lr", t.critic_lr);
  get("actor_hidden", t.actor_hidden);
  get("critic_hidden", t.critic_hidden);
  get("extra_hidden_layers", t.extra_hidden_layers);
  get("clip_epsilon", t.clip_epsilon);
  get("temperature_lr", t.temperature_lr);
  get("temperature_min", t.temperature_min);
  get("initial_temperature", t.initial_temperature);
  if (j.contains("temperature_mode")) {
    t.temperature_mode = temperature_mode_from_string(j.at("temperature_mode").get<std::string>());
  }
  get("target_entropy", t.target_entropy);
  get("buffer_size", t.buffer_size);
  get("episodes_per_iteration", t.episodes_per_iteration);
  get("updates_per_iteration", t.updates_per_iteration);
  get("polyak", t.polyak);
  get("gamma", t.gamma);
  if (j.contains("reward_scaling")) {
    t.reward_scaling = reward_scaling_from_string(j.at("reward_scaling").get<std::string>());
  }
  get("batch_size", t.batch_size);
  get("exploration_noise", t.exploration_noise);
  get("warmup_episodes", t.warmup_episodes);
  get("initial_log_std", t.initial_log_std);
  get("policy_output_scale", t.policy_output_scale);
  get("policy_output_gain", t.policy_output_gain);
  get("normalize_per_iteration", t.normalize_per_iteration);
}

json stats_json(const Stats& s) {
  return {{"mean", s.mean}, {"std", s.std},   {"median", s.median},
          {"min", s.min},   {"max", s.max},   {"count", s.count}};
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

/// Per-trial headline number: the final loop value for the Shack-Hartmann
/// baseline, the trailing-window mean otherwise.
double trial_converged(Algorithm a, const std::vector<EpisodeRecord>& curve) {
  if (curve.empty()) return 0.0;
  if (a == Algorithm::shack_hartmann) return curve.back().mean_reward;
  return converged_value(curve);
}

using ActionFn = std::function<Eigen::VectorXd(const QuadrantObservation&)>;

std::vector<double> rollout(Environment& env, std::int64_t episode, const ActionFn& act,
                            TrajectoryLog* log, const std::string& run_id, int trial) {
  QuadrantObservation obs = env.reset(episode).observation;
  std::vector<double> rewards;
  int step = 0;
  while (!env.done()) {
    const Eigen::VectorXd a = act(obs);
    const StepResult r = env.step({a.data(), static_cast<std::size_t>(a.size())});
    if (log) log->append(run_id, trial, episode, step, r, l2_norm(a));
    rewards.push_back(r.reward);
    obs = r.observation;
    ++step;
  }
  return rewards;
}

BenchReading measure_command(const EnvComponents& c, const PhaseScreen& screen,
                             const ActuatorCommand& cmd, double wavelength) {
  return c.bench.measure(screen + c.dm.phase(cmd, wavelength));
}

ActuatorCommand oracle_for(const EnvComponents& c, const PhaseScreen& screen, double wavelength) {
  return c.dm.project_phase(-screen, c.bench.aperture_mask(), wavelength);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed " + path.filename().string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const json& header) {
  json m = header;
  m["format"] = "aorl-manifest";
  m["tool_version"] = kToolVersion;
  m["hash"] = "git-blob-sha1";
  json files = json::array();
  for (const auto& e : hash_tree(dir)) {
    files.push_back({{"path", e.path}, {"hash", e.hash}, {"bytes", e.bytes}});
  }
  m["files"] = files;
  const fs::path path = dir / "manifest.json";
  auto out = open_out(path);
  out << m.dump(2) << '\n';
  close_out(out, path);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (!is_safe_run_id(run_id)) throw ConfigError("run_id is not filesystem-safe: " + run_id);
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!(d_over_r0 >= 0.0) || !std::isfinite(d_over_r0)) {
    throw ConfigError("d_over_r0 must be finite and >= 0");
  }
  if (!(outer_scale > 0.0)) throw ConfigError("outer_scale must be positive");
  if (!(sh_gain > 0.0 && sh_gain <= 1.0)) throw ConfigError("sh_gain must be in (0, 1]");
  if (sh_iterations < 1) throw ConfigError("sh_iterations must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (output_dir.empty()) throw ConfigError("output directory is empty");
  env_for_trial(0).validate();
  train_for_trial(0).validate();
}

std::uint64_t ExperimentSpec::trial_seed(int trial) const {
  return derive_seed(seed, static_cast<std::uint64_t>(trial));
}

EnvConfig ExperimentSpec::env_for_trial(int trial) const {
  EnvConfig c = EnvConfig::standard(d_over_r0, trial_seed(trial));
  c.turbulence.outer_scale = outer_scale;
  c.episode_length = episode_length;
  c.screen_mode = screen_mode;
  c.reward = reward;
  return c;
}

TrainConfig ExperimentSpec::train_for_trial(int trial) const {
  TrainConfig t = train;
  t.algorithm = algorithm;
  t.total_episodes = episodes;
  t.seed = trial_seed(trial);
  return t;
}

void ExperimentSpec::set_algorithm(Algorithm a) {
  algorithm = a;
  train = TrainConfig::for_algorithm(a);
}

std::string spec_to_json(const ExperimentSpec& s) {
  json j = {{"run_id", s.run_id},
            {"algorithm", to_string(s.algorithm)},
            {"d_over_r0", s.d_over_r0},
            {"outer_scale", s.outer_scale},
            {"episodes", s.episodes},
            {"episode_length", s.episode_length},
            {"n_trials", s.n_trials},
            {"seed", s.seed},
            {"screen_mode", screen_mode_name(s.screen_mode)},
            {"reward", reward_name(s.reward)},
            {"sh_gain", s.sh_gain},
            {"sh_iterations", s.sh_iterations},
            {"eval_episodes", s.eval_episodes},
            {"write_trajectories", s.write_trajectories},
            {"output_dir", s.output_dir.generic_string()},
            {"train", train_to_json(s.train)}};
  return j.dump(2);
}

ExperimentSpec spec_from_json(const std::string& text) {
  ExperimentSpec s;
  try {
    const json j = json::parse(text);
    s.set_algorithm(algorithm_from_string(j.at("algorithm").get<std::string>()));
    s.run_id = j.at("run_id").get<std::string>();
    s.d_over_r0 = j.at("d_over_r0").get<double>();
    s.outer_scale = j.value("outer_scale", s.outer_scale);
    s.episodes = j.at("episodes").get<int>();
    s.episode_length = j.value("episode_length", s.episode_length);
    s.n_trials = j.at("n_trials").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.screen_mode = screen_mode_from(j.value("screen_mode", "fixed_per_run"));
    s.reward = reward_from(j.value("reward", "direct"));
    s.sh_gain = j.value("sh_gain", s.sh_gain);
    s.sh_iterations = j.value("sh_iterations", s.sh_iterations);
    s.eval_episodes = j.value("eval_episodes", s.eval_episodes);
    s.write_trajectories = j.value("write_trajectories", false);
    s.output_dir = j.value("output_dir", s.output_dir.generic_string());
    if (j.contains("train")) train_from_json(j.at("train"), s.train);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed experiment spec: ") + e.what());
  } catch (const ConfigError& e) {
    throw InputError(std::string("malformed experiment spec: ") + e.what());
  }
  return s;
}

bool is_safe_run_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_' || c == '.';
  });
}

int default_thread_count() {
  if (const char* env = std::getenv("AORL_THREADS"); env && *env) {
    int n = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto r = std::from_chars(env, end, n);
    if (r.ec != std::errc() || r.ptr != end || n < 1) {
      throw ConfigError(std::string("AORL_THREADS must be a positive integer, got '") + env + "'");
    }
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ShackHartmannRig::ShackHartmannRig(const EnvConfig& cfg, const DeformableMirror& dm)
    : lenslets(LensletConfig{}, cfg.optics.pupil, cfg.optics.aperture_diameter),
      reconstructor(calibrate(dm, lenslets, cfg.optics.wavelength)) {}

TrialResult run_trial(const ExperimentSpec& spec, int trial,
                      const std::shared_ptr<const EnvComponents>& components,
                      const ShackHartmannRig& rig) {
  TrialResult out;
  out.trial = trial;
  out.seed = spec.trial_seed(trial);
  try {
    const EnvConfig ec = spec.env_for_trial(trial);
    Environment env(ec, components);
    const double lambda = ec.optics.wavelength;
    const PhaseScreen screen = env.screen_for_episode(0);

    const ShackHartmannLoop loop(components->dm, rig.lenslets, rig.reconstructor,
                                 components->bench, ec.reward);
    const std::vector<LoopIteration> sh_iters = loop.run(screen, spec.sh_gain, spec.sh_iterations);
    out.sh = sh_iters.back().strehl.value;
    out.uncorrected = components->bench.measure(screen).strehl(ec.reward);
    out.oracle =
        measure_command(*components, screen, oracle_for(*components, screen, lambda), lambda)
            .strehl(ec.reward);

    std::unique_ptr<TrajectoryLog> traj;
    if (spec.write_trajectories) {
      traj = std::make_unique<TrajectoryLog>(spec.output_dir / "trajectories" /
                                             (trial_stem(trial) + ".csv"));
    }

    const TrainConfig tc = spec.train_for_trial(trial);
    switch (spec.algorithm) {
      case Algorithm::ppo:
      case Algorithm::sac:
      case Algorithm::ddpg: {
        TrainResult r = spec.algorithm == Algorithm::ppo   ? ppo_train(env, tc)
                        : spec.algorithm == Algorithm::sac ? sac_train(env, tc)
                                                           : ddpg_train(env, tc);
        out.curve = std::move(r.curve);
        out.policy = r.policy;
        out.snapshot = std::move(r.snapshot);
        out.has_snapshot = true;
        if (traj) {
          const Policy& p = *out.policy;
          rollout(env, 0, [&](const QuadrantObservation& o) { return p.act(o); }, traj.get(),
                  spec.run_id, trial);
        }
        break;
      }
      case Algorithm::shack_hartmann:
        for (std::size_t i = 0; i < sh_iters.size(); ++i) {
          EpisodeRecord rec = summarize_episode(static_cast<int>(i), static_cast<int>(i),
                                                {sh_iters[i].strehl.value});
          out.curve.push_back(rec);
        }
        break;
      case Algorithm::zero_policy:
      case Algorithm::oracle_policy: {
        const bool oracle = spec.algorithm == Algorithm::oracle_policy;
        for (int e = 0; e < spec.eval_episodes; ++e) {
          const Eigen::VectorXd command =
              oracle ? oracle_for(*components, env.screen_for_episode(e), lambda).values
                     : Eigen::VectorXd::Zero(env.action_size());
          const auto rewards = rollout(
              env, e, [&](const QuadrantObservation&) { return command; }, traj.get(),
              spec.run_id, trial);
          out.curve.push_back(summarize_episode(e, e, rewards));
        }
        break;
      }
    }
    out.converged = trial_converged(spec.algorithm, out.curve);
    out.max_reward = max_value(out.curve);
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.curve.clear();
    out.policy.reset();
    out.has_snapshot = false;
  }
  return out;
}

Stats describe(const std::vector<double>& values) {
  Stats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

RunArtifacts run_experiment(const ExperimentSpec& spec, const LogFn& log) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = spec.output_dir;
  ensure_directory(dir);
  if (spec.write_trajectories) ensure_directory(dir / "trajectories");
  {
    const fs::path path = dir / "spec.json";
    auto out = open_out(path);
    out << spec_to_json(spec) << '\n';
    close_out(out, path);
  }

  const EnvConfig ec0 = spec.env_for_trial(0);
  const auto components = std::make_shared<const EnvComponents>(ec0);
  const ShackHartmannRig rig(ec0, components->dm);

  const int n_threads = std::min(spec.threads > 0 ? spec.threads : default_thread_count(),
                                 spec.n_trials);
  std::vector<TrialResult> results(static_cast<std::size_t>(spec.n_trials));
  std::atomic<int> next{0};
  std::mutex log_mutex;
  std::exception_ptr io_failure;
  auto worker = [&] {
    for (int t = next++; t < spec.n_trials; t = next++) {
      try {
        results[static_cast<std::size_t>(t)] = run_trial(spec, t, components, rig);
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!io_failure) io_failure = std::current_exception();
        return;
      }
      if (log) {
        const TrialResult& r = results[static_cast<std::size_t>(t)];
        std::ostringstream msg;
        msg << spec.run_id << " trial " << t;
        if (r.failed) {
          msg << " FAILED: " << r.error;
        } else {
          msg << std::fixed << std::setprecision(3) << " converged " << r.converged << " sh "
              << r.sh;
        }
        std::lock_guard lock(log_mutex);
        log(msg.str());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (io_failure) std::rethrow_exception(io_failure);

  RunArtifacts art;
  art.directory = dir;
  std::vector<double> conv, maxr, sh, unc, orc;
  for (const auto& r : results) {
    if (r.failed) {
      ++art.summary.n_failed;
      continue;
    }
    conv.push_back(r.converged);
    maxr.push_back(r.max_reward);
    sh.push_back(r.sh);
    unc.push_back(r.uncorrected);
    orc.push_back(r.oracle);
  }
  art.summary.converged = describe(conv);
  art.summary.max_reward = describe(maxr);
  art.summary.sh = describe(sh);
  art.summary.uncorrected = describe(unc);
  art.summary.oracle = describe(orc);

  const std::string algo = to_string(spec.algorithm);
  const std::string ratio = shortest(spec.d_over_r0);
  {
    const fs::path path = dir / "curves.csv";
    auto out = open_out(path);
    out << "algorithm,d_over_r0,trial,episode,iteration,mean_reward,std_reward,max_reward,"
           "final_reward,alpha\n";
    for (const auto& r : results) {
      for (const auto& e : r.curve) {
        out << algo << ',' << ratio << ',' << r.trial << ',' << e.episode << ',' << e.iteration
            << ',' << e.mean_reward << ',' << e.std_reward << ',' << e.max_reward << ','
            << e.final_reward << ',' << e.alpha << '\n';
      }
    }
    close_out(out, path);
  }
  {
    const fs::path path = dir / "trials.csv";
    auto out = open_out(path);
    out << "trial,seed,status,converged,max_reward,sh,uncorrected,oracle\n";
    for (const auto& r : results) {
      out << r.trial << ',' << r.seed << ',' << (r.failed ? "failed" : "ok") << ','
          << r.converged << ',' << r.max_reward << ',' << r.sh << ',' << r.uncorrected << ','
          << r.oracle << '\n';
    }
    close_out(out, path);
  }
  bool any_checkpoint = false;
  for (const auto& r : results) {
    if (!r.has_snapshot) continue;
    if (!any_checkpoint) ensure_directory(dir / "checkpoints");
    any_checkpoint = true;
    save_checkpoint(dir / "checkpoints" / trial_stem(r.trial), r.snapshot, spec.algorithm);
  }
  {
    json s = {{"run_id", spec.run_id},
              {"algorithm", algo},
              {"d_over_r0", spec.d_over_r0},
              {"n_trials", spec.n_trials},
              {"n_failed", art.summary.n_failed},
              {"converged_definition", spec.algorithm == Algorithm::shack_hartmann
                                           ? "final loop iteration"
                                           : "mean over the final 10% of episodes"},
              {"converged", stats_json(art.summary.converged)},
              {"max_reward", stats_json(art.summary.max_reward)},
              {"sh_paired", stats_json(art.summary.sh)},
              {"uncorrected", stats_json(art.summary.uncorrected)},
              {"oracle", stats_json(art.summary.oracle)},
              {"median_over_sh_mean", art.summary.sh.mean > 0.0
                                          ? art.summary.converged.median / art.summary.sh.mean
                                          : 0.0}};
    const fs::path path = dir / "summary.json";
    auto out = open_out(path);
    out << s.dump(2) << '\n';
    close_out(out, path);
  }
  {
    std::map<int, std::vector<double>> by_episode;
    for (const auto& r : results) {
      for (const auto& e : r.curve) by_episode[e.episode].push_back(e.mean_reward);
    }
    BandSeries band{algo, {}, {}, {}};
    BandSeries ref{"Shack-Hartmann (paired)", {}, {}, {}};
    for (const auto& [ep, vals] : by_episode) {
      const Stats st = describe(vals);
      band.x.push_back(ep);
      band.mean.push_back(st.mean);
      band.stddev.push_back(st.std);
      ref.x.push_back(ep);
      ref.mean.push_back(art.summary.sh.mean);
      ref.stddev.push_back(art.summary.sh.std);
    }
    std::vector<BandSeries> series{band};
    if (spec.algorithm != Algorithm::shack_hartmann) series.push_back(ref);
    write_band_chart(dir / "learning_curve.svg", series,
                     {spec.run_id + " (D/r0 = " + ratio + ")",
                      spec.algorithm == Algorithm::shack_hartmann ? "iteration" : "episode",
                      "Strehl ratio"});
  }

  art.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  art.trials = std::move(results);

  json trials = json::array();
  for (const auto& r : art.trials) {
    json t = {{"trial", r.trial}, {"seed", r.seed}, {"status", r.failed ? "failed" : "ok"}};
    if (r.failed) t["error"] = r.error;
    trials.push_back(t);
  }
  write_manifest(dir, {{"kind", "run"},
                       {"run_id", spec.run_id},
                       {"spec", json::parse(spec_to_json(spec))},
                       {"wall_seconds", art.summary.wall_seconds},
                       {"threads", n_threads},
                       {"trials", trials}});
  return art;
}

std::vector<SweepPoint> severity_sweep(const ExperimentSpec& base, const std::vector<double>& ratios,
                                       const LogFn& log) {
  if (ratios.empty()) throw ConfigError("sweep needs at least one ratio");
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("sweep ratios must be positive");
  }
  base.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_directory(base.output_dir);
  std::vector<SweepPoint> points;
  for (double r : ratios) {
    ExperimentSpec s = base;
    s.d_over_r0 = r;
    s.run_id = base.run_id + "-dr0_" + shortest(r);
    s.output_dir = base.output_dir / ("dr0_" + shortest(r));
    points.push_back({r, run_experiment(s, log).summary});
  }
  {
    const fs::path path = base.output_dir / "sweep.csv";
    auto out = open_out(path);
    out << "d_over_r0,algorithm,mean,std,median,sh_mean,uncorrected_mean,n_failed\n";
    for (const auto& p : points) {
      out << shortest(p.d_over_r0) << ',' << to_string(base.algorithm) << ','
          << p.summary.converged.mean << ',' << p.summary.converged.std << ','
          << p.summary.converged.median << ',' << p.summary.sh.mean << ','
          << p.summary.uncorrected.mean << ',' << p.summary.n_failed << '\n';
    }
    close_out(out, path);
  }
  BandSeries algo{to_string(base.algorithm), {}, {}, {}};
  BandSeries sh{"Shack-Hartmann (paired)", {}, {}, {}};
  for (const auto& p : points) {
    algo.x.push_back(p.d_over_r0);
    algo.mean.push_back(p.summary.converged.mean);
    algo.stddev.push_back(p.summary.converged.std);
    sh.x.push_back(p.d_over_r0);
    sh.mean.push_back(p.summary.sh.mean);
    sh.stddev.push_back(p.summary.sh.std);
  }
  write_band_chart(base.output_dir / "sweep.svg", {algo, sh},
                   {base.run_id + " severity sweep", "D/r0", "converged Strehl ratio"});
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(base.output_dir, {{"kind", "sweep"},
                                   {"run_id", base.run_id},
                                   {"spec", json::parse(spec_to_json(base))},
                                   {"ratios", ratios},
                                   {"wall_seconds", wall}});
  return points;
}

std::vector<RenderedMap> render_power_maps(const fs::path& run_dir,
                                           const std::vector<std::string>& stages, int trial,
                                           const fs::path& out_dir) {
  std::ifstream in(run_dir / "spec.json");
  if (!in) throw InputError("no spec.json in " + run_dir.string());
  const ExperimentSpec spec =
      spec_from_json({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
  if (trial < 0 || trial >= spec.n_trials) throw ConfigError("trial index out of range");
  for (const auto& s : stages) {
    if (std::find(kRenderStages.begin(), kRenderStages.end(), s) == kRenderStages.end()) {
      throw ConfigError("unknown render stage: " + s);
    }
  }
  const EnvConfig ec = spec.env_for_trial(trial);
  const auto components = std::make_shared<const EnvComponents>(ec);
  const double lambda = ec.optics.wavelength;
  Environment env(ec, components);
  const PhaseScreen screen = env.screen_for_episode(0);
  ensure_directory(out_dir);

  std::vector<RenderedMap> out;
  for (const auto& stage : stages) {
    BenchReading reading;
    if (stage == "uncorrected") {
      reading = components->bench.measure(screen);
    } else if (stage == "random") {
      RandomStream rng(spec.trial_seed(trial), streams::exploration);
      const double sigma = std::exp(TrainConfig::for_algorithm(Algorithm::ppo).initial_log_std);
      Eigen::VectorXd a(env.action_size());
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = sigma * rng.normal();
      reading = measure_command(*components, screen, clamp_command(a).command, lambda);
    } else if (stage == "sh") {
      const ShackHartmannRig rig(ec, components->dm);
      const ShackHartmannLoop loop(components->dm, rig.lenslets, rig.reconstructor,
                                   components->bench, ec.reward);
      const auto iters = loop.run(screen, spec.sh_gain, spec.sh_iterations);
      reading = measure_command(*components, screen, iters.back().command, lambda);
    } else if (stage == "oracle") {
      reading = measure_command(*components, screen, oracle_for(*components, screen, lambda),
                                lambda);
    } else {
      const auto policy = make_policy(load_checkpoint(run_dir / "checkpoints" / trial_stem(trial)));
      rollout(env, 0, [&](const QuadrantObservation& o) { return policy->act(o); }, nullptr, "",
              trial);
      reading = env.last_reading();
    }
    const RealMap map = reading.focal_power / components->bench.ideal_peak();
    const fs::path path = out_dir / ("power_" + stage + ".pgm");
    write_pgm(path, map,
              {{"strehl_direct", reading.strehl_direct},
               {"strehl_mahajan", reading.strehl_mahajan},
               {"d_over_r0", spec.d_over_r0},
               {"trial", static_cast<double>(trial)}});
    out.push_back({stage, path, reading.strehl_direct});
  }
  return out;
}

std::vector<CheckResult> invariant_suite() {
  std::vector<CheckResult> out;
  {
    const auto got = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    const Philox4x32::Counter want = {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8};
    out.push_back({"philox_known_answer", got == want, "counter 0, key 0"});
  }
  {
    const OpticalConfig oc;
    const SamplingGrid focal = complete_focal_grid(oc.pupil, oc.aperture_diameter);
    const FocalPropagator prop(oc.pupil, focal, oc.aperture_diameter);
    RandomStream rng(1, 99);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      ScalarField f(oc.pupil);
      for (Eigen::Index r = 0; r < f.amplitude.rows(); ++r) {
        for (Eigen::Index c = 0; c < f.amplitude.cols(); ++c) {
          f.amplitude(r, c) = {rng.normal(), rng.normal()};
        }
      }
      const double pin = f.total_power();
      worst = std::max(worst, std::abs(prop.propagate(f).total_power() - pin) / pin);
    }
    std::ostringstream d;
    d << "worst relative power error " << worst;
    out.push_back({"parseval", worst <= 1e-6, d.str()});
  }
  {
    RandomStream rng(2, 99);
    Eigen::VectorXd raw(64);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = rng.uniform(-3.0, 3.0);
    const ActuatorCommand once = clamp_command(raw).command;
    const ActuatorCommand twice = clamp_command(once.values).command;
    const bool ok = once.values == twice.values && once.values.cwiseAbs().maxCoeff() <= 1.0;
    out.push_back({"clamp_idempotent", ok, "clamp(clamp(u)) == clamp(u), |u| <= 1"});
  }
  {
    const EnvConfig ec = EnvConfig::standard(5.0, 1);
    const DeformableMirror dm(ec.dm, ec.optics.pupil);
    RandomStream rng(3, 99);
    ActuatorCommand a{Eigen::VectorXd(64)}, b{Eigen::VectorXd(64)};
    for (int i = 0; i < 64; ++i) {
      a.values[i] = rng.uniform(-0.5, 0.5);
      b.values[i] = rng.uniform(-0.5, 0.5);
    }
    const RealMap sum = dm.surface(ActuatorCommand{a.values + b.values});
    const RealMap parts = dm.surface(a) + dm.surface(b);
    const double rel = (sum - parts).cwiseAbs().maxCoeff() / parts.cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "relative superposition error " << rel;
    out.push_back({"dm_linearity", rel <= 1e-12, d.str()});
  }
  return out;
}

std::vector<CheckResult> verify_run(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw InputError("no such run directory: " + run_dir.string());
  const json manifest = read_json(run_dir / "manifest.json");
  std::vector<CheckResult> out;

  std::vector<ManifestEntry> listed;
  try {
    for (const auto& f : manifest.at("files")) {
      listed.push_back({f.at("path").get<std::string>(), f.at("hash").get<std::string>(),
                        f.value<std::uintmax_t>("bytes", 0)});
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  const auto problems = check_tree(run_dir, listed);
  std::ostringstream detail;
  detail << listed.size() << " files listed";
  for (const auto& p : problems) detail << "; " << p.path << " " << p.issue;
  out.push_back({"manifest_hashes", problems.empty(), detail.str()});

  if (manifest.value("kind", "run") == "run" && fs::exists(run_dir / "curves.csv") &&
      fs::exists(run_dir / "summary.json")) {
    const json summary = read_json(run_dir / "summary.json");
    const Algorithm algo = algorithm_from_string(summary.at("algorithm").get<std::string>());
    const auto rows = read_csv(run_dir / "curves.csv");
    std::map<int, std::vector<EpisodeRecord>> curves;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 10) throw InputError("curves.csv row " + std::to_string(i) + " is short");
      EpisodeRecord e;
      e.episode = std::stoi(rows[i][3]);
      e.mean_reward = std::stod(rows[i][5]);
      curves[std::stoi(rows[i][2])].push_back(e);
    }
    std::vector<double> conv;
    for (const auto& [t, c] : curves) conv.push_back(trial_converged(algo, c));
    const Stats st = describe(conv);
    const double stored = summary.at("converged").at("mean").get<double>();
    const double err = std::abs(st.mean - stored) / std::max(1e-300, std::abs(stored));
    std::ostringstream d;
    d << "recomputed converged mean " << st.mean << " vs stored " << stored;
    out.push_back({"summary_matches_curves", err <= 1e-12 || st.mean == stored, d.str()});
  }

  for (auto& c : invariant_suite()) out.push_back(std::move(c));
  return out;
}

double bootstrap_greater(const std::vector<double>& a, const std::vector<double>& b,
                         int resamples, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw InputError("bootstrap needs non-empty samples");
  if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  RandomStream rng(seed, 0);
  int wins = 0;
  for (int k = 0; k < resamples; ++k) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[rng.below(a.size())];
    for (std::size_t i = 0; i < b.size(); ++i) mb += b[rng.below(b.size())];
    if (ma / static_cast<double>(a.size()) > mb / static_cast<double>(b.size())) ++wins;
  }
  return static_cast<double>(wins) / resamples;
}

}  // namespace aorl

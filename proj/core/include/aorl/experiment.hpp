#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aorl/environment.hpp"
#include "aorl/rl_common.hpp"
#include "aorl/shack_hartmann.hpp"

namespace aorl {

/// One experiment: n_trials independent, seeded trials of one algorithm.
struct ExperimentSpec {
  std::string run_id = "run";
  Algorithm algorithm = Algorithm::ppo;
  double d_over_r0 = 5.0;
  double outer_scale = 25.0;
  int episodes = 250;
  int episode_length = 30;
  int n_trials = 20;
  std::uint64_t seed = 7;
  ScreenMode screen_mode = ScreenMode::fixed_per_run;
  RewardKind reward = RewardKind::direct;
  double sh_gain = 0.5;
  int sh_iterations = 20;
  /// Deterministic evaluation episodes for the non-learning baselines.
  int eval_episodes = 1;
  bool write_trajectories = false;
  /// Worker threads; 0 picks AORL_THREADS or the hardware concurrency.
  int threads = 0;
  TrainConfig train = TrainConfig::for_algorithm(Algorithm::ppo);
  std::filesystem::path output_dir = "runs/run";

  /// Throws ConfigError.
  void validate() const;
  [[nodiscard]] std::uint64_t trial_seed(int trial) const;
  [[nodiscard]] EnvConfig env_for_trial(int trial) const;
  [[nodiscard]] TrainConfig train_for_trial(int trial) const;

  /// Sets the algorithm and resets `train` to its published defaults.
  void set_algorithm(Algorithm a);
};

std::string spec_to_json(const ExperimentSpec& spec);
/// Throws InputError for malformed text.
ExperimentSpec spec_from_json(const std::string& text);

/// Filesystem-safe: letters, digits, '-', '_' and '.', not starting with '.'.
bool is_safe_run_id(const std::string& id);

/// Worker count from AORL_THREADS when set (must be a positive integer,
/// otherwise ConfigError), else the hardware concurrency.
int default_thread_count();

/// Calibrated sensor shared by every trial of a run.
struct ShackHartmannRig {
  LensletArray lenslets;
  Reconstructor reconstructor;

  ShackHartmannRig(const EnvConfig& cfg, const DeformableMirror& dm);
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<EpisodeRecord> curve;
  double converged = 0.0;
  double max_reward = 0.0;
  /// Paired references on this trial's first screen.
  double sh = 0.0;
  double uncorrected = 0.0;
  double oracle = 0.0;
  std::shared_ptr<Policy> policy;
  PolicySnapshot snapshot;
  bool has_snapshot = false;
};

/// Runs one trial. Numeric and protocol failures are caught and reported
/// through TrialResult::failed.
TrialResult run_trial(const ExperimentSpec& spec, int trial,
                      const std::shared_ptr<const EnvComponents>& components,
                      const ShackHartmannRig& rig);

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

Stats describe(const std::vector<double>& values);

struct RunSummary {
  Stats converged;
  Stats max_reward;
  Stats sh;
  Stats uncorrected;
  Stats oracle;
  int n_failed = 0;
  double wall_seconds = 0.0;
};

struct RunArtifacts {
  RunSummary summary;
  std::vector<TrialResult> trials;
  std::filesystem::path directory;
};

using LogFn = std::function<void(const std::string&)>;

/// Runs every trial on a bounded worker pool and writes curves.csv,
/// trials.csv, summary.json, spec.json, learning_curve.svg, per-trial
/// checkpoints and manifest.json into spec.output_dir. Throws IoError when the
/// directory cannot be written.
RunArtifacts run_experiment(const ExperimentSpec& spec, const LogFn& log = {});

struct SweepPoint {
  double d_over_r0 = 0.0;
  RunSummary summary;
};

/// One run per ratio in `<output_dir>/dr0_<ratio>`, plus sweep.csv and
/// sweep.svg. Ratios must be non-empty and positive.
std::vector<SweepPoint> severity_sweep(const ExperimentSpec& base, const std::vector<double>& ratios,
                                       const LogFn& log = {});

struct RenderedMap {
  std::string stage;
  std::filesystem::path path;
  double strehl_direct = 0.0;
};

inline const std::vector<std::string> kRenderStages = {"uncorrected", "random", "sh", "policy",
                                                      "oracle"};

/// Focal power maps (in units of the diffraction-limited peak) for the given
/// stages of trial `trial` of a finished run. "policy" needs the trial's
/// checkpoint; a missing one throws InputError.
std::vector<RenderedMap> render_power_maps(const std::filesystem::path& run_dir,
                                           const std::vector<std::string>& stages, int trial,
                                           const std::filesystem::path& out_dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Re-hashes the files listed in the run's manifest, recomputes the summary
/// from curves.csv and runs a quick invariant suite. Throws InputError when
/// the run directory or its manifest is unreadable.
std::vector<CheckResult> verify_run(const std::filesystem::path& run_dir);

/// Fast physics and RNG invariants, independent of any run.
std::vector<CheckResult> invariant_suite();

/// Fraction of bootstrap resamples in which mean(a*) > mean(b*).
double bootstrap_greater(const std::vector<double>& a, const std::vector<double>& b,
                         int resamples, std::uint64_t seed);

}  // namespace aorl

// aorl: experiment runner for the adaptive-optics RL environment.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "aorl/errors.hpp"
#include "aorl/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kAcceptance = 3, kIo = 4 };

using aorl::Algorithm;
using aorl::ExperimentSpec;

/// Flags shared by train, baseline and sweep. Hyperparameter overrides are
/// optional so that unset ones keep the published defaults of whichever
/// algorithm ends up selected.
struct CommonFlags {
  std::string algo = "ppo";
  double d_over_r0 = 5.0;
  double outer_scale = 25.0;
  int episodes = 250;
  int episode_len = 30;
  int trials = 20;
  std::uint64_t seed = 7;
  std::string out = "runs/run";
  std::string run_id;
  int threads = 0;
  std::string screen_mode = "fixed_per_run";
  std::string reward = "direct";
  double sh_gain = 0.5;
  int sh_iterations = 20;
  int eval_episodes = 1;
  bool trajectories = false;
  std::optional<double> expect_min, expect_max;

  std::optional<double> actor_lr, critic_lr, clip, gamma, polyak, temperature_lr, temperature_min,
      initial_temperature, target_entropy, exploration_noise, initial_log_std, output_gain,
      output_scale;
  std::optional<int> actor_hidden, critic_hidden, extra_layers, updates, episodes_per_iter, buffer,
      batch, warmup;
  std::optional<std::string> reward_scaling, temperature_mode;
  std::optional<bool> per_iteration_normalization;
};

void add_env_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--d-over-r0", f.d_over_r0, "turbulence severity D/r0 (0 = none)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--outer-scale", f.outer_scale, "von Karman outer scale L0 [m]");
  app->add_option("--episodes", f.episodes, "training episodes per trial");
  app->add_option("--episode-len", f.episode_len, "steps per episode (30, 50 or 100)");
  app->add_option("--trials", f.trials, "independent seeded trials");
  app->add_option("--seed", f.seed, "experiment seed");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--run-id", f.run_id, "run identifier (defaults to the output directory name)");
  app->add_option("--threads", f.threads, "worker threads (default: AORL_THREADS or all cores)");
  app->add_option("--screen-mode", f.screen_mode, "fixed_per_run or resample_per_episode");
  app->add_option("--reward", f.reward, "direct or mahajan");
  app->add_option("--sh-gain", f.sh_gain, "Shack-Hartmann integrator gain");
  app->add_option("--sh-iterations", f.sh_iterations, "Shack-Hartmann loop iterations");
  app->add_option("--eval-episodes", f.eval_episodes, "evaluation episodes for fixed baselines");
  app->add_flag("--trajectories", f.trajectories, "write per-step trajectory logs");
  app->add_option("--expect-min", f.expect_min,
                  "exit 3 unless the median converged Strehl is at least this");
  app->add_option("--expect-max", f.expect_max,
                  "exit 3 unless the median converged Strehl is at most this");
}

void add_train_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--actor-lr", f.actor_lr);
  app->add_option("--critic-lr", f.critic_lr);
  app->add_option("--actor-hidden", f.actor_hidden);
  app->add_option("--critic-hidden", f.critic_hidden);
  app->add_option("--extra-layers", f.extra_layers, "additional hidden layers");
  app->add_option("--clip", f.clip, "PPO clipping epsilon");
  app->add_option("--gamma", f.gamma);
  app->add_option("--polyak", f.polyak);
  app->add_option("--updates", f.updates, "gradient updates per iteration");
  app->add_option("--episodes-per-iter", f.episodes_per_iter);
  app->add_option("--buffer", f.buffer, "replay buffer capacity");
  app->add_option("--batch", f.batch, "off-policy batch size");
  app->add_option("--warmup", f.warmup, "off-policy warmup episodes");
  app->add_option("--reward-scaling", f.reward_scaling, "none, mean_std or min_max");
  app->add_option("--per-iteration-normalization", f.per_iteration_normalization,
                  "PPO: restart reward statistics every batch");
  app->add_option("--temperature-mode", f.temperature_mode, "fixed, learned or semi");
  app->add_option("--temperature-lr", f.temperature_lr);
  app->add_option("--temperature-min", f.temperature_min);
  app->add_option("--initial-temperature", f.initial_temperature);
  app->add_option("--target-entropy", f.target_entropy);
  app->add_option("--exploration-noise", f.exploration_noise);
  app->add_option("--initial-log-std", f.initial_log_std);
  app->add_option("--output-gain", f.output_gain, "PPO mean-head output gain");
  app->add_option("--output-scale", f.output_scale, "policy output layer init scale");
}

template <class T>
void apply(const std::optional<T>& v, T& field) {
  if (v) field = *v;
}

ExperimentSpec build_spec(const CommonFlags& f, Algorithm algo) {
  ExperimentSpec s;
  s.set_algorithm(algo);
  s.d_over_r0 = f.d_over_r0;
  s.outer_scale = f.outer_scale;
  s.episodes = f.episodes;
  s.episode_length = f.episode_len;
  s.n_trials = f.trials;
  s.seed = f.seed;
  s.output_dir = f.out;
  s.run_id = f.run_id.empty() ? std::filesystem::path(f.out).filename().string() : f.run_id;
  if (s.run_id.empty()) s.run_id = "run";
  s.threads = f.threads;
  if (f.screen_mode == "fixed_per_run" || f.screen_mode == "fixed") {
    s.screen_mode = aorl::ScreenMode::fixed_per_run;
  } else if (f.screen_mode == "resample_per_episode" || f.screen_mode == "resample") {
    s.screen_mode = aorl::ScreenMode::resample_per_episode;
  } else {
    throw aorl::ConfigError("unknown screen mode: " + f.screen_mode);
  }
  if (f.reward == "direct") {
    s.reward = aorl::RewardKind::direct;
  } else if (f.reward == "mahajan") {
    s.reward = aorl::RewardKind::mahajan;
  } else {
    throw aorl::ConfigError("unknown reward: " + f.reward);
  }
  s.sh_gain = f.sh_gain;
  s.sh_iterations = f.sh_iterations;
  s.eval_episodes = f.eval_episodes;
  s.write_trajectories = f.trajectories;

  auto& t = s.train;
  apply(f.actor_lr, t.actor_lr);
  apply(f.critic_lr, t.critic_lr);
  apply(f.actor_hidden, t.actor_hidden);
  apply(f.critic_hidden, t.critic_hidden);
  apply(f.extra_layers, t.extra_hidden_layers);
  apply(f.clip, t.clip_epsilon);
  apply(f.gamma, t.gamma);
  apply(f.polyak, t.polyak);
  apply(f.updates, t.updates_per_iteration);
  apply(f.episodes_per_iter, t.episodes_per_iteration);
  apply(f.buffer, t.buffer_size);
  apply(f.batch, t.batch_size);
  apply(f.warmup, t.warmup_episodes);
  if (f.reward_scaling) t.reward_scaling = aorl::reward_scaling_from_string(*f.reward_scaling);
  apply(f.per_iteration_normalization, t.normalize_per_iteration);
  if (f.temperature_mode) {
    t.temperature_mode = aorl::temperature_mode_from_string(*f.temperature_mode);
  }
  apply(f.temperature_lr, t.temperature_lr);
  apply(f.temperature_min, t.temperature_min);
  apply(f.initial_temperature, t.initial_temperature);
  apply(f.target_entropy, t.target_entropy);
  apply(f.exploration_noise, t.exploration_noise);
  apply(f.initial_log_std, t.initial_log_std);
  apply(f.output_gain, t.policy_output_gain);
  apply(f.output_scale, t.policy_output_scale);
  s.validate();
  return s;
}

aorl::LogFn stderr_log() {
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

void print_summary(const ExperimentSpec& s, const aorl::RunSummary& r) {
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "run " << s.run_id << " (" << aorl::to_string(s.algorithm) << ", D/r0 = "
            << s.d_over_r0 << ", " << s.n_trials << " trials, " << r.n_failed << " failed)\n";
  std::cout << "  converged  mean " << r.converged.mean << "  std " << r.converged.std
            << "  median " << r.converged.median << "\n";
  std::cout << "  max reward mean " << r.max_reward.mean << "\n";
  std::cout << "  paired SH  mean " << r.sh.mean << "   uncorrected mean " << r.uncorrected.mean
            << "   oracle mean " << r.oracle.mean << "\n";
  std::cout << "  wall time " << std::setprecision(1) << r.wall_seconds << " s\n";
}

int check_expectation(const CommonFlags& f, double median) {
  const bool low = f.expect_min && median < *f.expect_min;
  const bool high = f.expect_max && median > *f.expect_max;
  if (low || high) {
    std::cout << "acceptance FAILED: median converged " << median << " outside ["
              << (f.expect_min ? *f.expect_min : -INFINITY) << ", "
              << (f.expect_max ? *f.expect_max : INFINITY) << "]\n";
    return kAcceptance;
  }
  if (f.expect_min || f.expect_max) std::cout << "acceptance passed\n";
  return kOk;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Expands `--config <file>` into `--key=value` arguments placed right after
/// the subcommand, so flags given on the command line still win. The file
/// holds `key = value` lines; `#` starts a comment, strings may be quoted and
/// lists may be written as [a, b]. Throws ConfigError for an unreadable file
/// or a malformed line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::set<std::string> given;
  for (auto a = args.begin(); a != args.end();) {
    if (*a == "--config" && a + 1 != args.end()) {
      path = *(a + 1);
      a = args.erase(a, a + 2);
      continue;
    }
    if (a->rfind("--config=", 0) == 0) {
      path = a->substr(9);
      a = args.erase(a);
      continue;
    }
    if (a->rfind("--", 0) == 0) given.insert(a->substr(2, a->find('=') - 2));
    ++a;
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw aorl::ConfigError("cannot read config file " + path);
  std::vector<std::string> extra;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw aorl::ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw aorl::ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    else if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      std::string joined;
      for (const auto& item : split(value.substr(1, value.size() - 2), ',')) {
        if (!joined.empty()) joined += ',';
        joined += trim(item);
      }
      value = joined;
    }
    if (given.contains(key)) continue;
    extra.push_back("--" + key + "=" + value);
  }
  // Config values go before the user's flags, right after the subcommand.
  std::size_t at = 0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].rfind("-", 0) != 0) {
      at = i + 1;
      break;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-optics reinforcement-learning experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aorl 0.1.0");

  CommonFlags train_f, base_f, sweep_f;

  auto* train = app.add_subcommand("train", "train an RL algorithm over seeded trials");
  std::string train_config;
  train->add_option("--config", train_config, "TOML key = value file mirroring the flags");
  train->add_option("--algo", train_f.algo, "ppo, sac or ddpg")
      ->check(CLI::IsMember({"ppo", "sac", "ddpg"}));
  add_env_flags(train, train_f);
  add_train_flags(train, train_f);

  auto* baseline = app.add_subcommand("baseline", "run a non-learning reference controller");
  std::string baseline_config;
  baseline->add_option("--config", baseline_config, "TOML key = value file mirroring the flags");
  bool use_sh = false, use_zero = false, use_oracle = false;
  auto* sh_flag = baseline->add_flag("--sh", use_sh, "Shack-Hartmann integrator loop");
  auto* zero_flag = baseline->add_flag("--zero", use_zero, "flat mirror (uncorrected)");
  auto* oracle_flag = baseline->add_flag("--oracle", use_oracle, "least-squares projection");
  sh_flag->excludes(zero_flag)->excludes(oracle_flag);
  zero_flag->excludes(oracle_flag);
  add_env_flags(baseline, base_f);

  auto* sweep = app.add_subcommand("sweep", "repeat a run across D/r0 ratios");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "TOML key = value file mirroring the flags");
  std::vector<double> ratios{2, 5, 10};
  sweep->add_option("--ratios", ratios, "comma-separated D/r0 list")->delimiter(',');
  sweep->add_option("--algo", sweep_f.algo, "ppo, sac, ddpg, sh, zero or oracle");
  add_env_flags(sweep, sweep_f);
  add_train_flags(sweep, sweep_f);

  auto* render = app.add_subcommand("render", "focal power maps for a finished run");
  std::string render_config;
  render->add_option("--config", render_config, "TOML key = value file mirroring the flags");
  std::string render_run, render_out, render_stages = "uncorrected,random,sh,policy";
  int render_trial = 0;
  render->add_option("--run", render_run, "run directory")->required();
  render->add_option("--stages", render_stages, "comma-separated: uncorrected,random,sh,policy,oracle");
  render->add_option("--trial", render_trial, "trial index");
  render->add_option("--out", render_out, "output directory (default <run>/maps)");

  auto* verify = app.add_subcommand("verify", "re-check manifest hashes and invariants");
  std::string verify_run;
  verify->add_option("--run", verify_run, "run directory")->required();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;  } catch (const aorl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*train) {
      const auto spec = build_spec(train_f, aorl::algorithm_from_string(train_f.algo));
      const auto art = aorl::run_experiment(spec, stderr_log());
      print_summary(spec, art.summary);
      return check_expectation(train_f, art.summary.converged.median);
    }
    if (*baseline) {
      const Algorithm a = use_zero     ? Algorithm::zero_policy
                          : use_oracle ? Algorithm::oracle_policy
                                       : Algorithm::shack_hartmann;
      const auto spec = build_spec(base_f, a);
      const auto art = aorl::run_experiment(spec, stderr_log());
      print_summary(spec, art.summary);
      return check_expectation(base_f, art.summary.converged.median);
    }
    if (*sweep) {
      const auto spec = build_spec(sweep_f, aorl::algorithm_from_string(sweep_f.algo));
      const auto points = aorl::severity_sweep(spec, ratios, stderr_log());
      std::cout << "d_over_r0  mean     std      median   sh_mean\n" << std::fixed
                << std::setprecision(4);
      for (const auto& p : points) {
        std::cout << std::setw(9) << p.d_over_r0 << "  " << p.summary.converged.mean << "  "
                  << p.summary.converged.std << "  " << p.summary.converged.median << "  "
                  << p.summary.sh.mean << '\n';
      }
      return kOk;
    }
    if (*render) {
      const std::filesystem::path out =
          render_out.empty() ? std::filesystem::path(render_run) / "maps" : std::filesystem::path(render_out);
      const auto maps = aorl::render_power_maps(render_run, split(render_stages, ','),
                                                render_trial, out);
      std::cout << std::fixed << std::setprecision(4);
      for (const auto& m : maps) {
        std::cout << std::left << std::setw(12) << m.stage << " Strehl " << m.strehl_direct
                  << "  " << m.path.string() << '\n';
      }
      return kOk;
    }
    if (*verify) {
      const auto checks = aorl::verify_run(verify_run);
      bool ok = true;
      for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? kOk : kAcceptance;
    }
  } catch (const aorl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const aorl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const aorl::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

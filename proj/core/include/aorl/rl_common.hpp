#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aorl/environment.hpp"
#include "aorl/mlp.hpp"
#include "aorl/random.hpp"

namespace aorl {

enum class Algorithm { ppo, sac, ddpg, shack_hartmann, zero_policy, oracle_policy };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);
[[nodiscard]] inline bool is_learning(Algorithm a) {
  return a == Algorithm::ppo || a == Algorithm::sac || a == Algorithm::ddpg;
}

enum class RewardScaling { none, mean_std, min_max };
enum class TemperatureMode { fixed, learned, semi };

std::string to_string(RewardScaling s);
RewardScaling reward_scaling_from_string(const std::string& name);
std::string to_string(TemperatureMode m);
TemperatureMode temperature_mode_from_string(const std::string& name);

/// Training hyperparameters. for_algorithm() returns the published table
/// values; anything else is an override and is reported by overrides().
struct TrainConfig {
  Algorithm algorithm = Algorithm::ppo;
  double actor_lr = 1e-2;
  double critic_lr = 5e-6;
  int actor_hidden = 150;
  int critic_hidden = 50;
  /// Extra hidden layers of the same width; 0 = one hidden layer.
  int extra_hidden_layers = 0;
  double clip_epsilon = 0.35;
  double temperature_lr = 1e-1;
  double temperature_min = 0.4;
  double initial_temperature = 1.0;
  TemperatureMode temperature_mode = TemperatureMode::semi;
  double target_entropy = -64.0;
  int buffer_size = 0;
  int episodes_per_iteration = 2;
  int updates_per_iteration = 20;
  double polyak = 0.99;
  double gamma = 0.95;
  RewardScaling reward_scaling = RewardScaling::mean_std;
  int total_episodes = 250;
  int batch_size = 64;
  double exploration_noise = 0.1;
  int warmup_episodes = 2;
  double initial_log_std = -2.5;
  /// Initialization scale of the policy output layer.
  double policy_output_scale = 1.0;
  /// Fixed factor applied to the PPO mean-network output.
  double policy_output_gain = 0.003;
  /// PPO: reward statistics restart with every batch instead of running over
  /// the whole training history.
  bool normalize_per_iteration = true;
  std::uint64_t seed = 0;

  static TrainConfig for_algorithm(Algorithm a);
  void validate() const;
  /// "name: default -> value" for every field that differs from the table.
  [[nodiscard]] std::vector<std::string> overrides() const;
  /// Stable key=value text of every field, used for hashing.
  [[nodiscard]] std::string canonical() const;
};

/// Network input: the four quadrant powers scaled by 4 so an unaberrated PSF
/// reads close to 1 per quadrant.
Eigen::Vector4d observation_features(const QuadrantObservation& obs);

/// Running reward statistics (Welford). In mean_std mode
/// normalize(r) = (r - mean) / (std + 1e-8) with the population std; min_max
/// maps onto [0, 1] by the running extremes.
class RewardNormalizer {
 public:
  explicit RewardNormalizer(RewardScaling mode = RewardScaling::none) : mode_(mode) {}

  void observe(double reward);
  [[nodiscard]] double normalize(double reward) const;
  /// observe() then normalize().
  double operator()(double reward) {
    observe(reward);
    return normalize(reward);
  }

  [[nodiscard]] RewardScaling mode() const { return mode_; }
  [[nodiscard]] long count() const { return count_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double stddev() const;

 private:
  RewardScaling mode_;
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct Transition {
  Eigen::Vector4d obs;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::Vector4d next_obs;
  bool done = false;
};

/// Fixed-capacity FIFO ring with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  /// Oldest first.
  [[nodiscard]] std::vector<Transition> contents() const;
  [[nodiscard]] std::vector<const Transition*> sample(std::size_t batch, RandomStream& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Deterministic action map used for evaluation and rendering.
class Policy {
 public:
  virtual ~Policy() = default;
  [[nodiscard]] virtual Eigen::VectorXd act(const QuadrantObservation& obs) const = 0;
};

class ZeroPolicy final : public Policy {
 public:
  explicit ZeroPolicy(int action_size) : size_(action_size) {}
  [[nodiscard]] Eigen::VectorXd act(const QuadrantObservation&) const override {
    return Eigen::VectorXd::Zero(size_);
  }

 private:
  int size_;
};

/// One row of a learning curve. Rewards are raw Strehl values.
struct EpisodeRecord {
  int episode = 0;
  int iteration = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double max_reward = 0.0;
  double final_reward = 0.0;
  double alpha = 0.0;  // SAC temperature; 0 otherwise
};

enum class PolicyKind { gaussian, squashed_gaussian, deterministic };

std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& name);

/// Everything needed to rebuild a trained policy's deterministic action map.
struct PolicySnapshot {
  PolicyKind kind = PolicyKind::deterministic;
  std::vector<int> widths;
  OutputActivation output = OutputActivation::linear;
  double output_gain = 1.0;
  Eigen::VectorXd params;
  Eigen::VectorXd log_std;  // gaussian only
};

/// Rebuilds the policy; throws InputError when the parameters do not fit the widths.
std::shared_ptr<Policy> make_policy(const PolicySnapshot& snapshot);

struct TrainResult {
  std::vector<EpisodeRecord> curve;
  std::shared_ptr<Policy> policy;
  PolicySnapshot snapshot;
};

/// Called after each training episode with its record.
using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

/// Statistics of one episode's raw rewards.
EpisodeRecord summarize_episode(int episode, int iteration, const std::vector<double>& rewards);

/// {input, hidden, ..., hidden, output} with 1 + extra_layers hidden layers.
std::vector<int> network_widths(int input, int hidden, int extra_layers, int output);

/// Mean squared error of a scalar-output network against targets, with its
/// parameter gradient.
struct RegressionGradient {
  double loss = 0.0;
  Eigen::VectorXd params;
};

RegressionGradient regression_loss(const Mlp& net, const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& targets);

/// Stacks features (4 x B) over actions (A x B) as Q-network input.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& features, const Eigen::MatrixXd& actions);

/// dQ/d(action) for each column, from a Q network with critic_input layout.
Eigen::MatrixXd action_gradient(const Mlp& critic, const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& actions);

/// Uniform [-1, 1] action vector, used during off-policy warmup.
Eigen::VectorXd uniform_action(int size, RandomStream& rng);

/// Throws NumericError naming `what` unless every entry is finite.
void require_finite(const Eigen::VectorXd& v, const std::string& what);

/// Mean over the trailing 10% of episodes (at least one).
double converged_value(const std::vector<EpisodeRecord>& curve);
double max_value(const std::vector<EpisodeRecord>& curve);

struct EvalSummary {
  double mean_final = 0.0;
  double std_final = 0.0;
  double mean_step = 0.0;
  double std_step = 0.0;
  std::vector<double> finals;
};

/// Deterministic rollouts with no learning. Episodes use indices
/// first_episode .. first_episode + n_episodes - 1.
EvalSummary evaluate_policy(const Policy& policy, Environment& env, int n_episodes,
                            std::int64_t first_episode = 0);

double l2_norm(const Eigen::VectorXd& v);

}  // namespace aorl

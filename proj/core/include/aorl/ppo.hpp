#pragma once

#include <string>
#include <vector>

#include "aorl/mlp.hpp"
#include "aorl/rl_common.hpp"

namespace aorl {

/// Diagonal Gaussian policy: mean from an MLP of the observation features,
/// state-independent learnable log standard deviation.
class GaussianPolicy final : public Policy {
 public:
  GaussianPolicy(Mlp mean_net, Eigen::VectorXd log_std, double output_gain = 1.0);

  [[nodiscard]] Eigen::VectorXd act(const QuadrantObservation& obs) const override;
  Eigen::VectorXd sample(const QuadrantObservation& obs, RandomStream& rng) const;

  /// Mean actions for a 4 x B feature matrix.
  [[nodiscard]] Eigen::MatrixXd means(const Eigen::MatrixXd& features) const;

  /// Column-wise log densities of `actions` given `means`.
  [[nodiscard]] Eigen::VectorXd log_prob(const Eigen::MatrixXd& means,
                                         const Eigen::MatrixXd& actions) const;

  Mlp mean_net;
  Eigen::VectorXd log_std;
  /// Fixed factor between the mean network output and the action.
  double output_gain = 1.0;
};

struct PpoBatch {
  Eigen::MatrixXd features;  // 4 x B
  Eigen::MatrixXd actions;   // A x B, as sampled (before environment clamping)
  Eigen::VectorXd old_log_prob;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

/// L = mean(min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)) and its gradient
/// with respect to the mean-network parameters and the log-std vector
/// (ascent direction).
struct SurrogateGradient {
  double objective = 0.0;
  Eigen::VectorXd mean_params;
  Eigen::VectorXd log_std;
  double clip_fraction = 0.0;
};

SurrogateGradient clipped_surrogate(const GaussianPolicy& policy, const PpoBatch& batch,
                                    double clip_epsilon);

/// Discounted returns within episodes; the accumulation restarts after every
/// done flag.
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<bool>& dones, double gamma);

/// On-policy PPO: episodes_per_iteration rollouts, then updates_per_iteration
/// full-batch gradient steps on the clipped surrogate and the value MSE.
/// Episodes use indices 0 .. total_episodes - 1 of `env`. Throws NumericError
/// with the offending batch when a loss turns non-finite.
TrainResult ppo_train(Environment& env, const TrainConfig& cfg,
                      const EpisodeCallback& on_episode = {});

/// Formats a batch as CSV text for numeric-failure diagnostics.
std::string dump_batch(const PpoBatch& batch);

}  // namespace aorl

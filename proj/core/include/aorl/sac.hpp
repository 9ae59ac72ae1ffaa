#pragma once

#include "aorl/mlp.hpp"
#include "aorl/rl_common.hpp"

namespace aorl {

inline constexpr double kSacLogStdMin = -20.0;
inline constexpr double kSacLogStdMax = 2.0;

/// tanh-squashed Gaussian actor. The network emits the pre-squash mean in
/// rows [0, A) and the log standard deviation in rows [A, 2A).
class SquashedGaussianPolicy final : public Policy {
 public:
  explicit SquashedGaussianPolicy(Mlp net);

  /// tanh(mean).
  [[nodiscard]] Eigen::VectorXd act(const QuadrantObservation& obs) const override;
  [[nodiscard]] int action_size() const { return net.output_size() / 2; }

  Mlp net;
};

/// Reparameterized sample for a batch, given standard-normal noise (A x B).
struct SquashedSample {
  Mlp::Cache cache;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd log_std;  // clamped
  Eigen::MatrixXd pre_tanh;
  Eigen::MatrixXd action;
  Eigen::VectorXd log_prob;
};

SquashedSample sample_squashed(const SquashedGaussianPolicy& policy, const Eigen::MatrixXd& features,
                               const Eigen::MatrixXd& noise);

/// y = r + gamma * (1 - done) * (min(Q1', Q2') - alpha * log pi(a'|s')).
double sac_critic_target(double reward, bool done, double q1_next, double q2_next, double alpha,
                         double log_prob_next, double gamma);

/// Actor objective mean(alpha * log pi(a|s) - min(Q1, Q2)(s, a)) over the
/// batch, with its gradient with respect to the actor parameters.
struct SacActorLoss {
  double loss = 0.0;
  double mean_log_prob = 0.0;
  Eigen::VectorXd params;
};

SacActorLoss sac_actor_loss(const SquashedGaussianPolicy& policy, const Mlp& q1, const Mlp& q2,
                            double alpha, const Eigen::MatrixXd& features,
                            const Eigen::MatrixXd& noise);

/// Temperature objective J(alpha) = mean(-alpha * (log pi + target_entropy));
/// returns dJ/dalpha.
double temperature_gradient(double mean_log_prob, double target_entropy);

/// Off-policy SAC with twin critics, Polyak targets and the configured
/// temperature mode. Episodes use indices 0 .. total_episodes - 1 of `env`.
TrainResult sac_train(Environment& env, const TrainConfig& cfg,
                      const EpisodeCallback& on_episode = {});

}  // namespace aorl

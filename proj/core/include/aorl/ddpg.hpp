#pragma once

#include "aorl/mlp.hpp"
#include "aorl/rl_common.hpp"

namespace aorl {

/// tanh-output actor mapping features straight to an action in [-1, 1].
class DeterministicPolicy final : public Policy {
 public:
  explicit DeterministicPolicy(Mlp net);

  [[nodiscard]] Eigen::VectorXd act(const QuadrantObservation& obs) const override;

  Mlp net;
};

/// y = r + gamma * (1 - done) * Q'(s', mu'(s')).
double ddpg_critic_target(double reward, bool done, double q_next, double gamma);

/// Actor objective -mean(Q(s, mu(s))) and its gradient with respect to the
/// actor parameters.
struct DdpgActorLoss {
  double loss = 0.0;
  Eigen::VectorXd params;
};

DdpgActorLoss ddpg_actor_loss(const DeterministicPolicy& policy, const Mlp& critic,
                              const Eigen::MatrixXd& features);

/// Off-policy DDPG with Gaussian exploration noise and Polyak targets.
/// Rewards are normalized before they enter the buffer.
TrainResult ddpg_train(Environment& env, const TrainConfig& cfg,
                       const EpisodeCallback& on_episode = {});

}  // namespace aorl

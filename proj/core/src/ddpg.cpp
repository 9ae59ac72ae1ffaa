#include "aorl/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace aorl {

DeterministicPolicy::DeterministicPolicy(Mlp n) : net(std::move(n)) {
  if (net.output_activation() != OutputActivation::tanh) {
    throw ConfigError("deterministic policy needs a tanh output layer");
  }
}

Eigen::VectorXd DeterministicPolicy::act(const QuadrantObservation& obs) const {
  return net.forward(observation_features(obs)).col(0);
}

double ddpg_critic_target(double reward, bool done, double q_next, double gamma) {
  return reward + (done ? 0.0 : gamma * q_next);
}

DdpgActorLoss ddpg_actor_loss(const DeterministicPolicy& policy, const Mlp& critic,
                              const Eigen::MatrixXd& features) {
  Mlp::Cache cache;
  const Eigen::MatrixXd actions = policy.net.forward(features, cache);
  const double n = static_cast<double>(features.cols());
  DdpgActorLoss out;
  out.loss = -critic.forward(critic_input(features, actions)).mean();
  const Eigen::MatrixXd d_actions = -action_gradient(critic, features, actions) / n;
  policy.net.backward(cache, d_actions, out.params);
  return out;
}

TrainResult ddpg_train(Environment& env, const TrainConfig& cfg, const EpisodeCallback& on_episode) {
  cfg.validate();
  const int obs_size = Environment::observation_size();
  const int act_size = env.action_size();

  RandomStream init_rng(cfg.seed, streams::network_init);
  Mlp actor_net(network_widths(obs_size, cfg.actor_hidden, cfg.extra_hidden_layers, act_size),
                OutputActivation::tanh);
  actor_net.initialize(init_rng);
  DeterministicPolicy policy(std::move(actor_net));
  Mlp critic(network_widths(obs_size + act_size, cfg.critic_hidden, cfg.extra_hidden_layers, 1));
  critic.initialize(init_rng);
  Mlp actor_target = policy.net;
  Mlp critic_target = critic;

  Adam actor_opt(policy.net.parameter_count(), cfg.actor_lr);
  Adam critic_opt(critic.parameter_count(), cfg.critic_lr);
  RandomStream explore(cfg.seed, streams::exploration);
  RandomStream replay_rng(cfg.seed, streams::replay);
  RandomStream warmup(cfg.seed, streams::warmup);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_size));
  RewardNormalizer normalizer(cfg.reward_scaling);

  TrainResult result;
  int episode = 0;
  int iteration = 0;
  while (episode < cfg.total_episodes) {
    for (int e = 0; e < cfg.episodes_per_iteration && episode < cfg.total_episodes; ++e, ++episode) {
      const bool warm = episode < cfg.warmup_episodes;
      QuadrantObservation obs = env.reset(episode).observation;
      std::vector<double> raw;
      while (!env.done()) {
        const Eigen::Vector4d f = observation_features(obs);
        Eigen::VectorXd a;
        if (warm) {
          a = uniform_action(act_size, warmup);
        } else {
          a = policy.net.forward(f).col(0);
          for (Eigen::Index i = 0; i < a.size(); ++i) {
            a[i] = std::clamp(a[i] + cfg.exploration_noise * explore.normal(), -1.0, 1.0);
          }
        }
        const StepResult r = env.step({a.data(), static_cast<std::size_t>(a.size())});
        raw.push_back(r.reward);
        buffer.push({f, a, normalizer(r.reward), observation_features(r.observation), r.done});
        obs = r.observation;
      }
      EpisodeRecord rec = summarize_episode(episode, iteration, raw);
      result.curve.push_back(rec);
      if (on_episode) on_episode(rec);
    }

    if (episode >= cfg.warmup_episodes) {
      for (int u = 0; u < cfg.updates_per_iteration; ++u) {
        const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), replay_rng);
        const auto n = static_cast<Eigen::Index>(batch.size());
        Eigen::MatrixXd f(obs_size, n), f_next(obs_size, n), acts(act_size, n);
        for (Eigen::Index b = 0; b < n; ++b) {
          f.col(b) = batch[static_cast<std::size_t>(b)]->obs;
          f_next.col(b) = batch[static_cast<std::size_t>(b)]->next_obs;
          acts.col(b) = batch[static_cast<std::size_t>(b)]->action;
        }
        const Eigen::MatrixXd next_actions = actor_target.forward(f_next);
        const Eigen::RowVectorXd q_next =
            critic_target.forward(critic_input(f_next, next_actions)).row(0);
        Eigen::VectorXd y(n);
        for (Eigen::Index b = 0; b < n; ++b) {
          const Transition& t = *batch[static_cast<std::size_t>(b)];
          y[b] = ddpg_critic_target(t.reward, t.done, q_next[b], cfg.gamma);
        }
        const RegressionGradient c = regression_loss(critic, critic_input(f, acts), y);
        if (!std::isfinite(c.loss)) {
          throw NumericError("DDPG critic loss became non-finite at iteration " +
                             std::to_string(iteration));
        }
        critic_opt.step(critic.parameters(), c.params);

        const DdpgActorLoss al = ddpg_actor_loss(policy, critic, f);
        if (!std::isfinite(al.loss)) {
          throw NumericError("DDPG actor loss became non-finite at iteration " +
                             std::to_string(iteration));
        }
        actor_opt.step(policy.net.parameters(), al.params);

        polyak_update(actor_target.parameters(), policy.net.parameters(), cfg.polyak);
        polyak_update(critic_target.parameters(), critic.parameters(), cfg.polyak);
      }
      require_finite(policy.net.parameters(), "DDPG actor parameters");
      require_finite(critic.parameters(), "DDPG critic parameters");
    }
    ++iteration;
  }

  result.snapshot.kind = PolicyKind::deterministic;
  result.snapshot.widths = policy.net.widths();
  result.snapshot.output = policy.net.output_activation();
  result.snapshot.params = policy.net.parameters();
  result.policy = std::make_shared<DeterministicPolicy>(std::move(policy));
  return result;
}

}  // namespace aorl

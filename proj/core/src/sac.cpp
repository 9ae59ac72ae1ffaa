#include "aorl/sac.hpp"

#include <algorithm>
#include <cmath>

namespace aorl {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;
constexpr double kSquashEps = 1e-6;

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace

SquashedGaussianPolicy::SquashedGaussianPolicy(Mlp n) : net(std::move(n)) {
  if (net.output_size() % 2 != 0) throw DimensionError("squashed policy needs 2A outputs");
}

Eigen::VectorXd SquashedGaussianPolicy::act(const QuadrantObservation& obs) const {
  const Eigen::MatrixXd out = net.forward(observation_features(obs));
  return out.topRows(action_size()).col(0).array().tanh();
}

SquashedSample sample_squashed(const SquashedGaussianPolicy& policy, const Eigen::MatrixXd& features,
                               const Eigen::MatrixXd& noise) {
  const int a = policy.action_size();
  if (noise.rows() != a || noise.cols() != features.cols()) {
    throw DimensionError("noise must be A x B");
  }
  SquashedSample s;
  const Eigen::MatrixXd out = policy.net.forward(features, s.cache);
  s.mean = out.topRows(a);
  s.log_std = out.bottomRows(a).cwiseMax(kSacLogStdMin).cwiseMin(kSacLogStdMax);
  s.pre_tanh = s.mean + (s.log_std.array().exp() * noise.array()).matrix();
  s.action = s.pre_tanh.array().tanh();
  s.log_prob.resize(features.cols());
  for (Eigen::Index b = 0; b < features.cols(); ++b) {
    const Eigen::ArrayXd sq = 1.0 - s.action.col(b).array().square() + kSquashEps;
    s.log_prob[b] = (-0.5 * noise.col(b).array().square() - s.log_std.col(b).array() -
                     kHalfLogTwoPi - sq.log())
                        .sum();
  }
  return s;
}

double sac_critic_target(double reward, bool done, double q1_next, double q2_next, double alpha,
                         double log_prob_next, double gamma) {
  const double soft = std::min(q1_next, q2_next) - alpha * log_prob_next;
  return reward + (done ? 0.0 : gamma * soft);
}

SacActorLoss sac_actor_loss(const SquashedGaussianPolicy& policy, const Mlp& q1, const Mlp& q2,
                            double alpha, const Eigen::MatrixXd& features,
                            const Eigen::MatrixXd& noise) {
  const SquashedSample s = sample_squashed(policy, features, noise);
  const Eigen::Index n = features.cols();
  const int a = policy.action_size();
  const Eigen::MatrixXd x = critic_input(features, s.action);
  const Eigen::RowVectorXd v1 = q1.forward(x).row(0);
  const Eigen::RowVectorXd v2 = q2.forward(x).row(0);
  const Eigen::MatrixXd g1 = action_gradient(q1, features, s.action);
  const Eigen::MatrixXd g2 = action_gradient(q2, features, s.action);

  SacActorLoss out;
  const Eigen::Index raw_rows = policy.net.output_size();
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(raw_rows, n);
  const Eigen::MatrixXd raw_log_std = s.cache.activations.back().bottomRows(a);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const bool first = v1[b] <= v2[b];
    const double q = first ? v1[b] : v2[b];
    out.loss += alpha * s.log_prob[b] - q;
    const Eigen::ArrayXd dq = first ? g1.col(b).array() : g2.col(b).array();
    const Eigen::ArrayXd act = s.action.col(b).array();
    const Eigen::ArrayXd one_minus = 1.0 - act.square();
    // d(loss)/d(pre_tanh): critic path through tanh plus the squash correction.
    const Eigen::ArrayXd d_pre =
        -dq * one_minus + alpha * 2.0 * act * one_minus / (one_minus + kSquashEps);
    d_out.col(b).head(a) = inv_n * d_pre.matrix();
    const Eigen::ArrayXd sigma_eps = s.log_std.col(b).array().exp() * noise.col(b).array();
    for (int i = 0; i < a; ++i) {
      const double raw = raw_log_std(i, b);
      const bool inside = raw > kSacLogStdMin && raw < kSacLogStdMax;
      d_out(a + i, b) = inside ? inv_n * (d_pre[i] * sigma_eps[i] - alpha) : 0.0;
    }
  }
  out.loss *= inv_n;
  out.mean_log_prob = s.log_prob.mean();
  policy.net.backward(s.cache, d_out, out.params);
  return out;
}

double temperature_gradient(double mean_log_prob, double target_entropy) {
  return -(mean_log_prob + target_entropy);
}

TrainResult sac_train(Environment& env, const TrainConfig& cfg, const EpisodeCallback& on_episode) {
  cfg.validate();
  const int obs_size = Environment::observation_size();
  const int act_size = env.action_size();

  RandomStream init_rng(cfg.seed, streams::network_init);
  Mlp actor_net(network_widths(obs_size, cfg.actor_hidden, cfg.extra_hidden_layers, 2 * act_size));
  actor_net.initialize(init_rng);
  SquashedGaussianPolicy policy(std::move(actor_net));
  const auto critic_widths =
      network_widths(obs_size + act_size, cfg.critic_hidden, cfg.extra_hidden_layers, 1);
  Mlp q1(critic_widths), q2(critic_widths);
  q1.initialize(init_rng);
  q2.initialize(init_rng);
  Mlp q1_target = q1, q2_target = q2;

  Adam actor_opt(policy.net.parameter_count(), cfg.actor_lr);
  Adam q1_opt(q1.parameter_count(), cfg.critic_lr);
  Adam q2_opt(q2.parameter_count(), cfg.critic_lr);
  Eigen::VectorXd alpha_param = Eigen::VectorXd::Constant(1, cfg.initial_temperature);
  Adam alpha_opt(1, cfg.temperature_lr);

  RandomStream explore(cfg.seed, streams::exploration);
  RandomStream replay_rng(cfg.seed, streams::replay);
  RandomStream warmup(cfg.seed, streams::warmup);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_size));
  RewardNormalizer normalizer(cfg.reward_scaling);

  const auto clamp_alpha = [&] {
    if (cfg.temperature_mode == TemperatureMode::semi) {
      alpha_param[0] = std::max(alpha_param[0], cfg.temperature_min);
    } else if (cfg.temperature_mode == TemperatureMode::learned) {
      alpha_param[0] = std::max(alpha_param[0], 0.0);
    }
  };
  clamp_alpha();

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
          a = sample_squashed(policy, f, normal_matrix(act_size, 1, explore)).action.col(0);
        }
        const StepResult r = env.step({a.data(), static_cast<std::size_t>(a.size())});
        raw.push_back(r.reward);
        buffer.push({f, a, normalizer(r.reward), observation_features(r.observation), r.done});
        obs = r.observation;
      }
      EpisodeRecord rec = summarize_episode(episode, iteration, raw);
      rec.alpha = alpha_param[0];
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
        const double alpha = alpha_param[0];

        const SquashedSample next = sample_squashed(policy, f_next, normal_matrix(act_size, n, explore));
        const Eigen::MatrixXd x_next = critic_input(f_next, next.action);
        const Eigen::RowVectorXd t1 = q1_target.forward(x_next).row(0);
        const Eigen::RowVectorXd t2 = q2_target.forward(x_next).row(0);
        Eigen::VectorXd y(n);
        for (Eigen::Index b = 0; b < n; ++b) {
          const Transition& t = *batch[static_cast<std::size_t>(b)];
          y[b] = sac_critic_target(t.reward, t.done, t1[b], t2[b], alpha, next.log_prob[b], cfg.gamma);
        }
        const Eigen::MatrixXd x = critic_input(f, acts);
        const RegressionGradient c1 = regression_loss(q1, x, y);
        const RegressionGradient c2 = regression_loss(q2, x, y);
        if (!std::isfinite(c1.loss) || !std::isfinite(c2.loss)) {
          throw NumericError("SAC critic loss became non-finite at iteration " +
                             std::to_string(iteration));
        }
        q1_opt.step(q1.parameters(), c1.params);
        q2_opt.step(q2.parameters(), c2.params);

        const SacActorLoss al =
            sac_actor_loss(policy, q1, q2, alpha, f, normal_matrix(act_size, n, explore));
        if (!std::isfinite(al.loss)) {
          throw NumericError("SAC actor loss became non-finite at iteration " +
                             std::to_string(iteration));
        }
        actor_opt.step(policy.net.parameters(), al.params);

        if (cfg.temperature_mode != TemperatureMode::fixed) {
          const Eigen::VectorXd g =
              Eigen::VectorXd::Constant(1, temperature_gradient(al.mean_log_prob, cfg.target_entropy));
          alpha_opt.step(alpha_param, g);
          clamp_alpha();
        }

        polyak_update(q1_target.parameters(), q1.parameters(), cfg.polyak);
        polyak_update(q2_target.parameters(), q2.parameters(), cfg.polyak);
      }
      require_finite(policy.net.parameters(), "SAC actor parameters");
      require_finite(q1.parameters(), "SAC critic parameters");
      require_finite(q2.parameters(), "SAC critic parameters");
    }
    ++iteration;
  }

  result.snapshot.kind = PolicyKind::squashed_gaussian;
  result.snapshot.widths = policy.net.widths();
  result.snapshot.output = policy.net.output_activation();
  result.snapshot.params = policy.net.parameters();
  result.policy = std::make_shared<SquashedGaussianPolicy>(std::move(policy));
  return result;
}

}  // namespace aorl

#include "aorl/ppo.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace aorl {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

}  // namespace

GaussianPolicy::GaussianPolicy(Mlp net, Eigen::VectorXd ls, double gain)
    : mean_net(std::move(net)), log_std(std::move(ls)), output_gain(gain) {
  if (log_std.size() != mean_net.output_size()) {
    throw DimensionError("log_std size must match the action size");
  }
}

Eigen::VectorXd GaussianPolicy::act(const QuadrantObservation& obs) const {
  return means(observation_features(obs)).col(0);
}

Eigen::MatrixXd GaussianPolicy::means(const Eigen::MatrixXd& features) const {
  return output_gain * mean_net.forward(features);
}

Eigen::VectorXd GaussianPolicy::sample(const QuadrantObservation& obs, RandomStream& rng) const {
  Eigen::VectorXd a = act(obs);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += std::exp(log_std[i]) * rng.normal();
  return a;
}

Eigen::VectorXd GaussianPolicy::log_prob(const Eigen::MatrixXd& means,
                                         const Eigen::MatrixXd& actions) const {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const double norm = -log_std.sum() - kHalfLogTwoPi * static_cast<double>(log_std.size());
  Eigen::VectorXd out(actions.cols());
  for (Eigen::Index b = 0; b < actions.cols(); ++b) {
    const Eigen::ArrayXd d = (actions.col(b) - means.col(b)).array();
    out[b] = -0.5 * (d.square() * inv_var).sum() + norm;
  }
  return out;
}

SurrogateGradient clipped_surrogate(const GaussianPolicy& policy, const PpoBatch& batch,
                                    double clip_epsilon) {
  const Eigen::Index n = batch.actions.cols();
  if (n == 0) throw InputError("empty PPO batch");
  Mlp::Cache cache;
  const Eigen::MatrixXd means = policy.output_gain * policy.mean_net.forward(batch.features, cache);
  const Eigen::VectorXd logp = policy.log_prob(means, batch.actions);
  const Eigen::ArrayXd inv_var = (-2.0 * policy.log_std.array()).exp();

  SurrogateGradient out;
  out.log_std = Eigen::VectorXd::Zero(policy.log_std.size());
  Eigen::MatrixXd d_means = Eigen::MatrixXd::Zero(means.rows(), n);
  int clipped = 0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const double ratio = std::exp(logp[b] - batch.old_log_prob[b]);
    const double adv = batch.advantages[b];
    const double lo = 1.0 - clip_epsilon;
    const double hi = 1.0 + clip_epsilon;
    const double clipped_ratio = std::clamp(ratio, lo, hi);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped_ratio * adv;
    out.objective += std::min(unclipped_term, clipped_term);
    // The gradient flows only while the ratio term is the active one.
    const bool active = unclipped_term <= clipped_term || (ratio >= lo && ratio <= hi);
    if (!active) {
      ++clipped;
      continue;
    }
    const double weight = ratio * adv / static_cast<double>(n);
    const double gain = policy.output_gain;
    const Eigen::ArrayXd diff = (batch.actions.col(b) - means.col(b)).array();
    d_means.col(b) = (gain * weight * diff * inv_var).matrix();
    out.log_std += (weight * (diff.square() * inv_var - 1.0)).matrix();
  }
  out.objective /= static_cast<double>(n);
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  out.mean_params = Eigen::VectorXd();
  policy.mean_net.backward(cache, d_means, out.mean_params);
  return out;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<bool>& dones, double gamma) {
  if (rewards.size() != dones.size()) throw DimensionError("rewards and dones differ in length");
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    if (dones[i]) running = 0.0;
    running = rewards[i] + gamma * running;
    out[i] = running;
  }
  return out;
}

std::string dump_batch(const PpoBatch& batch) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10);
  s << "index,old_log_prob,advantage,return";
  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) s << ",f" << i;
  for (Eigen::Index i = 0; i < batch.actions.rows(); ++i) s << ",a" << i;
  s << '\n';
  for (Eigen::Index b = 0; b < batch.actions.cols(); ++b) {
    s << b << ',' << batch.old_log_prob[b] << ',' << batch.advantages[b] << ','
      << batch.returns[b];
    for (Eigen::Index i = 0; i < batch.features.rows(); ++i) s << ',' << batch.features(i, b);
    for (Eigen::Index i = 0; i < batch.actions.rows(); ++i) s << ',' << batch.actions(i, b);
    s << '\n';
  }
  return s.str();
}

TrainResult ppo_train(Environment& env, const TrainConfig& cfg, const EpisodeCallback& on_episode) {
  cfg.validate();
  const int obs_size = Environment::observation_size();
  const int act_size = env.action_size();

  RandomStream init_rng(cfg.seed, streams::network_init);
  Mlp mean_net(network_widths(obs_size, cfg.actor_hidden, cfg.extra_hidden_layers, act_size));
  mean_net.initialize(init_rng, cfg.policy_output_scale);
  Mlp value_net(network_widths(obs_size, cfg.critic_hidden, cfg.extra_hidden_layers, 1));
  value_net.initialize(init_rng);
  GaussianPolicy policy(std::move(mean_net),
                        Eigen::VectorXd::Constant(act_size, cfg.initial_log_std),
                        cfg.policy_output_gain);

  Adam actor_opt(policy.mean_net.parameter_count(), cfg.actor_lr);
  Adam log_std_opt(act_size, cfg.actor_lr);
  Adam critic_opt(value_net.parameter_count(), cfg.critic_lr);
  RandomStream explore(cfg.seed, streams::exploration);
  RewardNormalizer normalizer(cfg.reward_scaling);

  TrainResult result;
  int episode = 0;
  int iteration = 0;
  while (episode < cfg.total_episodes) {
    std::vector<Eigen::Vector4d> feats;
    std::vector<Eigen::VectorXd> actions;
    std::vector<double> scaled;
    std::vector<double> raw_batch;
    std::vector<bool> dones;
    for (int e = 0; e < cfg.episodes_per_iteration && episode < cfg.total_episodes; ++e, ++episode) {
      QuadrantObservation obs = env.reset(episode).observation;
      std::vector<double> raw;
      while (!env.done()) {
        Eigen::VectorXd a = policy.sample(obs, explore);
        const StepResult r = env.step({a.data(), static_cast<std::size_t>(a.size())});
        feats.push_back(observation_features(obs));
        actions.push_back(std::move(a));
        raw.push_back(r.reward);
        raw_batch.push_back(r.reward);
        scaled.push_back(cfg.normalize_per_iteration ? r.reward : normalizer(r.reward));
        dones.push_back(r.done);
        obs = r.observation;
      }
      EpisodeRecord rec = summarize_episode(episode, iteration, raw);
      result.curve.push_back(rec);
      if (on_episode) on_episode(rec);
    }

    const auto n = static_cast<Eigen::Index>(actions.size());
    PpoBatch batch;
    batch.features.resize(obs_size, n);
    batch.actions.resize(act_size, n);
    for (Eigen::Index b = 0; b < n; ++b) {
      batch.features.col(b) = feats[static_cast<std::size_t>(b)];
      batch.actions.col(b) = actions[static_cast<std::size_t>(b)];
    }
    if (cfg.normalize_per_iteration) {
      RewardNormalizer batch_norm(cfg.reward_scaling);
      for (double r : raw_batch) batch_norm.observe(r);
      for (std::size_t i = 0; i < raw_batch.size(); ++i) scaled[i] = batch_norm.normalize(raw_batch[i]);
    }
    const std::vector<double> ret = discounted_returns(scaled, dones, cfg.gamma);
    batch.returns = Eigen::Map<const Eigen::VectorXd>(ret.data(), n);
    const Eigen::VectorXd values = value_net.forward(batch.features).row(0).transpose();
    Eigen::VectorXd adv = batch.returns - values;
    const double adv_mean = adv.mean();
    const double adv_std = std::sqrt((adv.array() - adv_mean).square().mean());
    batch.advantages = (adv.array() - adv_mean) / (adv_std + 1e-8);
    batch.old_log_prob = policy.log_prob(policy.means(batch.features), batch.actions);

    for (int u = 0; u < cfg.updates_per_iteration; ++u) {
      const SurrogateGradient g = clipped_surrogate(policy, batch, cfg.clip_epsilon);
      const RegressionGradient vg = regression_loss(value_net, batch.features, batch.returns);
      if (!std::isfinite(g.objective) || !std::isfinite(vg.loss) || !g.mean_params.allFinite() ||
          !g.log_std.allFinite()) {
        throw NumericError("PPO loss became non-finite at iteration " +
                           std::to_string(iteration) + "\n" + dump_batch(batch));
      }
      actor_opt.step(policy.mean_net.parameters(), -g.mean_params);
      log_std_opt.step(policy.log_std, -g.log_std);
      critic_opt.step(value_net.parameters(), vg.params);
    }
    if (!policy.mean_net.parameters().allFinite() || !policy.log_std.allFinite()) {
      throw NumericError("PPO parameters became non-finite at iteration " +
                         std::to_string(iteration) + "\n" + dump_batch(batch));
    }
    ++iteration;
  }

  result.snapshot.kind = PolicyKind::gaussian;
  result.snapshot.widths = policy.mean_net.widths();
  result.snapshot.output = policy.mean_net.output_activation();
  result.snapshot.output_gain = policy.output_gain;
  result.snapshot.params = policy.mean_net.parameters();
  result.snapshot.log_std = policy.log_std;
  result.policy = std::make_shared<GaussianPolicy>(std::move(policy));
  return result;
}

}  // namespace aorl

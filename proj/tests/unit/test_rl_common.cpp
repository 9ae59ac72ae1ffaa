#include <cmath>

#include <gtest/gtest.h>

#include "aorl/checkpoint.hpp"
#include "aorl/environment.hpp"
#include "aorl/errors.hpp"
#include "aorl/ppo.hpp"
#include "aorl/random.hpp"
#include "aorl/rl_common.hpp"
#include "test_support.hpp"

using namespace aorl;

TEST(Normalizer, WelfordOverOneToHundred) {
  RewardNormalizer n(RewardScaling::mean_std);
  double last = 0.0;
  for (int i = 1; i <= 100; ++i) last = n(static_cast<double>(i));
  double mean = 0.0;
  for (int i = 1; i <= 100; ++i) mean += i;
  mean /= 100.0;
  double var = 0.0;
  for (int i = 1; i <= 100; ++i) var += (i - mean) * (i - mean);
  const double std = std::sqrt(var / 100.0);
  EXPECT_NEAR(n.mean(), mean, 1e-6);
  EXPECT_NEAR(n.stddev(), std, 1e-9);
  EXPECT_NEAR(last, (100.0 - mean) / (std + 1e-8), 1e-12);
  EXPECT_EQ(n.count(), 100);
}

TEST(Normalizer, NoneIsPassthrough) {
  RewardNormalizer n(RewardScaling::none);
  EXPECT_EQ(n(0.37), 0.37);
  EXPECT_EQ(n(-2.0), -2.0);
}

TEST(Normalizer, MinMaxMapsToUnitInterval) {
  RewardNormalizer n(RewardScaling::min_max);
  n.observe(2.0);
  n.observe(6.0);
  EXPECT_DOUBLE_EQ(n.normalize(2.0), 0.0);
  EXPECT_NEAR(n.normalize(6.0), 1.0, 1e-8);
  EXPECT_NEAR(n.normalize(3.0), 0.25, 1e-8);
}

TEST(ReplayBuffer, KeepsLastCapacityItems) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 13; ++i) {
    Transition t;
    t.reward = i;
    t.action = Eigen::VectorXd::Zero(1);
    buf.push(t);
    EXPECT_LE(buf.size(), 5u);
  }
  const auto items = buf.contents();
  ASSERT_EQ(items.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(items[i].reward, 8 + i);
}

TEST(ReplayBuffer, SamplesOnlyStoredItems) {
  ReplayBuffer buf(4);
  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.reward = i;
    buf.push(t);
  }
  RandomStream rng(1, streams::replay);
  for (const auto* t : buf.sample(100, rng)) EXPECT_GE(t->reward, 2.0);
  EXPECT_THROW(ReplayBuffer(0), ConfigError);
}

TEST(TrainConfig, PublishedDefaults) {
  const auto ppo = TrainConfig::for_algorithm(Algorithm::ppo);
  EXPECT_EQ(ppo.actor_lr, 1e-2);
  EXPECT_EQ(ppo.critic_lr, 5e-6);
  EXPECT_EQ(ppo.actor_hidden, 150);
  EXPECT_EQ(ppo.critic_hidden, 50);
  EXPECT_EQ(ppo.clip_epsilon, 0.35);
  EXPECT_EQ(ppo.updates_per_iteration, 20);
  EXPECT_EQ(ppo.gamma, 0.95);
  const auto sac = TrainConfig::for_algorithm(Algorithm::sac);
  EXPECT_EQ(sac.buffer_size, 128);
  EXPECT_EQ(sac.temperature_min, 0.4);
  EXPECT_EQ(sac.temperature_mode, TemperatureMode::semi);
  const auto ddpg = TrainConfig::for_algorithm(Algorithm::ddpg);
  EXPECT_EQ(ddpg.buffer_size, 256);
  EXPECT_EQ(ddpg.actor_hidden, 250);
  EXPECT_EQ(ddpg.reward_scaling, RewardScaling::mean_std);
  EXPECT_TRUE(ppo.overrides().empty());
}

TEST(TrainConfig, OverridesAreReported) {
  auto c = TrainConfig::for_algorithm(Algorithm::ppo);
  c.actor_lr = 3e-3;
  const auto o = c.overrides();
  ASSERT_EQ(o.size(), 1u);
  EXPECT_NE(o[0].find("actor_lr"), std::string::npos);
  EXPECT_NE(c.canonical(), TrainConfig::for_algorithm(Algorithm::ppo).canonical());
}

TEST(TrainConfig, RejectsBadValues) {
  auto c = TrainConfig::for_algorithm(Algorithm::ppo);
  c.actor_lr = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig::for_algorithm(Algorithm::ppo);
  c.total_episodes = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Names, RoundTrip) {
  for (auto a : {Algorithm::ppo, Algorithm::sac, Algorithm::ddpg, Algorithm::shack_hartmann,
                 Algorithm::zero_policy, Algorithm::oracle_policy}) {
    EXPECT_EQ(algorithm_from_string(to_string(a)), a);
  }
  EXPECT_THROW(algorithm_from_string("a3c"), ConfigError);
}

TEST(Curve, ConvergedIsTrailingTenPercent) {
  std::vector<EpisodeRecord> curve;
  for (int i = 0; i < 250; ++i) {
    EpisodeRecord r;
    r.episode = i;
    r.mean_reward = i < 225 ? 0.0 : 1.0 + (i - 225) * 0.01;
    curve.push_back(r);
  }
  EXPECT_NEAR(converged_value(curve), 1.12, 1e-12);
  EXPECT_NEAR(max_value(curve), 1.24, 1e-12);
}

TEST(Evaluation, ZeroPolicyGivesUncorrectedStrehl) {
  auto ec = EnvConfig::standard(5.0, 12);
  Environment env(ec);
  const ZeroPolicy zero(64);
  const auto s = evaluate_policy(zero, env, 3);
  double want = 0.0;
  for (int e = 0; e < 3; ++e) want += env.reset(e).info.strehl_direct;
  EXPECT_NEAR(s.mean_final, want / 3, 1e-15);
  EXPECT_NEAR(s.mean_step, want / 3, 1e-15);
}

TEST(Checkpoint, RoundTripRebuildsPolicy) {
  const auto dir = aorl::testing::scratch_dir("ckpt");
  RandomStream rng(4, 0);
  Mlp net({4, 6, 64});
  net.initialize(rng);
  PolicySnapshot s;
  s.kind = PolicyKind::gaussian;
  s.widths = net.widths();
  s.output = OutputActivation::linear;
  s.output_gain = 0.003;
  s.params = net.parameters();
  s.log_std = Eigen::VectorXd::Constant(64, -2.5);
  save_checkpoint(dir / "p", s, Algorithm::ppo);
  const auto back = load_checkpoint(dir / "p");
  EXPECT_EQ(back.kind, s.kind);
  EXPECT_EQ(back.widths, s.widths);
  EXPECT_EQ(back.output_gain, s.output_gain);
  EXPECT_TRUE(back.params == s.params);
  EXPECT_TRUE(back.log_std == s.log_std);
  const QuadrantObservation obs{{0.2, 0.1, 0.3, 0.25}};
  const GaussianPolicy direct(net, s.log_std, 0.003);
  EXPECT_TRUE(make_policy(back)->act(obs) == direct.act(obs));
}

TEST(Checkpoint, DamagedFilesRejected) {
  const auto dir = aorl::testing::scratch_dir("ckpt_bad");
  EXPECT_THROW(load_checkpoint(dir / "missing"), InputError);
  RandomStream rng(5, 0);
  Mlp net({4, 3, 2}, OutputActivation::tanh);
  net.initialize(rng);
  PolicySnapshot s;
  s.widths = net.widths();
  s.output = OutputActivation::tanh;
  s.params = net.parameters();
  save_checkpoint(dir / "p", s, Algorithm::ddpg);
  std::filesystem::resize_file(dir / "p.bin", 8);
  EXPECT_THROW(load_checkpoint(dir / "p"), InputError);
  s.params.conservativeResize(3);
  EXPECT_THROW(make_policy(s), InputError);
}

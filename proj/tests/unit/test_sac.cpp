#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aorl/environment.hpp"
#include "aorl/random.hpp"
#include "aorl/sac.hpp"
#include "test_support.hpp"

using namespace aorl;
using aorl::testing::numeric_gradient;
using aorl::testing::relative_error;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, RandomStream& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

EnvConfig fixed_env(std::uint64_t seed) {
  auto c = EnvConfig::standard(5.0, seed);
  c.screen_mode = ScreenMode::fixed_per_run;
  return c;
}

}  // namespace

TEST(SquashedSample, LogProbOfOneDimension) {
  RandomStream rng(1, 0);
  Mlp net({4, 3, 2});
  net.initialize(rng);
  const SquashedGaussianPolicy p(net);
  const Eigen::MatrixXd x = random_matrix(4, 1, rng);
  Eigen::MatrixXd noise(1, 1);
  noise << 0.7;
  const auto s = sample_squashed(p, x, noise);
  const Eigen::VectorXd out = net.forward(x);
  const double mu = out[0];
  const double ls = std::clamp(out[1], kSacLogStdMin, kSacLogStdMax);
  const double u = mu + std::exp(ls) * 0.7;
  EXPECT_NEAR(s.pre_tanh(0, 0), u, 1e-14);
  EXPECT_NEAR(s.action(0, 0), std::tanh(u), 1e-14);
  const double want = -0.5 * 0.49 - ls - 0.5 * std::log(2.0 * std::numbers::pi) -
                      std::log(1.0 - std::tanh(u) * std::tanh(u) + 1e-6);
  EXPECT_NEAR(s.log_prob[0], want, 1e-12);
}

TEST(SacActor, GradientMatchesFiniteDifference) {
  RandomStream rng(2, 0);
  const int a = 5, b = 6;
  Mlp actor({4, 8, 2 * a});
  actor.initialize(rng, 0.5);
  Mlp q1({4 + a, 7, 1}), q2({4 + a, 7, 1});
  q1.initialize(rng);
  q2.initialize(rng);
  const SquashedGaussianPolicy policy(actor);
  const Eigen::MatrixXd feats = random_matrix(4, b, rng).cwiseAbs();
  const Eigen::MatrixXd noise = random_matrix(a, b, rng);
  const double alpha = 0.4;
  const auto g = sac_actor_loss(policy, q1, q2, alpha, feats, noise);
  const auto f = [&](const Eigen::VectorXd& p) {
    SquashedGaussianPolicy copy = policy;
    copy.net.parameters() = p;
    return sac_actor_loss(copy, q1, q2, alpha, feats, noise).loss;
  };
  const Eigen::VectorXd fd = numeric_gradient(f, policy.net.parameters());
  EXPECT_LE(relative_error(g.params, fd), 1e-4);

  // The two output heads separately: last-layer rows [0, a) feed the mean,
  // rows [a, 2a) the log standard deviation.
  const Eigen::Index n = actor.parameter_count();
  const Eigen::Index bias0 = n - 2 * a;
  EXPECT_LE(relative_error(g.params.segment(bias0, a), fd.segment(bias0, a)), 1e-4);
  EXPECT_LE(relative_error(g.params.segment(bias0 + a, a), fd.segment(bias0 + a, a)), 1e-4);
}

TEST(SacCritic, TargetMatchesHandValue) {
  // r + gamma * (min(Q1', Q2') - alpha * log pi)
  const double y = sac_critic_target(0.3, false, 1.2, 0.9, 0.4, -2.5, 0.95);
  EXPECT_NEAR(y, 0.3 + 0.95 * (0.9 - 0.4 * -2.5), 1e-6);
  EXPECT_NEAR(y, 2.1050, 1e-6);
  EXPECT_EQ(sac_critic_target(0.3, true, 1.2, 0.9, 0.4, -2.5, 0.95), 0.3);
}

TEST(SacTemperature, GradientSign) {
  // Entropy above target: positive gradient, so descent lowers alpha.
  EXPECT_DOUBLE_EQ(temperature_gradient(60.0, -64.0), 4.0);
  // Entropy below target: alpha grows.
  EXPECT_DOUBLE_EQ(temperature_gradient(70.0, -64.0), -6.0);
}

TEST(SacTrain, FixedTemperatureStaysConstant) {
  Environment env(fixed_env(4));
  auto cfg = TrainConfig::for_algorithm(Algorithm::sac);
  cfg.temperature_mode = TemperatureMode::fixed;
  cfg.initial_temperature = 0.4;
  cfg.total_episodes = 6;
  cfg.seed = 1;
  const auto r = sac_train(env, cfg);
  ASSERT_EQ(r.curve.size(), 6u);
  for (const auto& e : r.curve) EXPECT_EQ(e.alpha, 0.4);
}

TEST(SacTrain, SemiTemperatureNeverBelowFloor) {
  Environment env(fixed_env(5));
  auto cfg = TrainConfig::for_algorithm(Algorithm::sac);
  cfg.total_episodes = 50;
  cfg.seed = 2;
  std::vector<double> seen;
  const auto r = sac_train(env, cfg, [&](const EpisodeRecord& e) { seen.push_back(e.alpha); });
  ASSERT_EQ(seen.size(), 50u);
  for (double a : seen) EXPECT_GE(a, 0.4);
  EXPECT_TRUE(r.snapshot.params.allFinite());
  EXPECT_EQ(r.snapshot.kind, PolicyKind::squashed_gaussian);
}

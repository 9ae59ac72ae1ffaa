#include <gtest/gtest.h>

#include "aorl/ddpg.hpp"
#include "aorl/environment.hpp"
#include "aorl/errors.hpp"
#include "aorl/random.hpp"
#include "test_support.hpp"

using namespace aorl;
using aorl::testing::numeric_gradient;
using aorl::testing::relative_error;

TEST(DdpgActor, GradientMatchesFiniteDifference) {
  RandomStream rng(3, 0);
  const int a = 6;
  Mlp actor({4, 8, a}, OutputActivation::tanh);
  actor.initialize(rng);
  Mlp critic({4 + a, 9, 1});
  critic.initialize(rng);
  const DeterministicPolicy policy(actor);
  Eigen::MatrixXd feats(4, 7);
  for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.uniform(0.0, 2.0);
  const auto g = ddpg_actor_loss(policy, critic, feats);
  const auto f = [&](const Eigen::VectorXd& p) {
    DeterministicPolicy copy = policy;
    copy.net.parameters() = p;
    return ddpg_actor_loss(copy, critic, feats).loss;
  };
  EXPECT_LE(relative_error(g.params, numeric_gradient(f, policy.net.parameters())), 1e-4);
  EXPECT_NEAR(g.loss, -critic.forward(critic_input(feats, actor.forward(feats))).mean(), 1e-12);
}

TEST(DdpgActor, RequiresTanhOutput) {
  EXPECT_THROW(DeterministicPolicy(Mlp({4, 3, 2})), ConfigError);
}

TEST(DdpgCritic, TargetMatchesHandValue) {
  EXPECT_NEAR(ddpg_critic_target(0.5, false, 2.0, 0.9), 2.3, 1e-12);
  EXPECT_EQ(ddpg_critic_target(0.5, true, 2.0, 0.9), 0.5);
}

TEST(DdpgTrain, BitReproducibleAndBounded) {
  auto run = [] {
    auto ec = EnvConfig::standard(5.0, 8);
    ec.screen_mode = ScreenMode::fixed_per_run;
    Environment env(ec);
    auto cfg = TrainConfig::for_algorithm(Algorithm::ddpg);
    cfg.total_episodes = 5;
    cfg.seed = 4;
    return ddpg_train(env, cfg);
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.curve.size(), 5u);
  for (std::size_t i = 0; i < a.curve.size(); ++i)
    EXPECT_EQ(a.curve[i].mean_reward, b.curve[i].mean_reward);
  EXPECT_TRUE(a.snapshot.params == b.snapshot.params);
  const QuadrantObservation obs{{0.2, 0.3, 0.1, 0.25}};
  EXPECT_LE(a.policy->act(obs).cwiseAbs().maxCoeff(), 1.0);
}

#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "aorl/environment.hpp"
#include "aorl/errors.hpp"
#include "aorl/random.hpp"
#include "test_support.hpp"

using namespace aorl;

namespace {

std::vector<double> random_action(RandomStream& rng, double scale = 0.3) {
  std::vector<double> a(64);
  for (auto& x : a) x = rng.uniform(-scale, scale);
  return a;
}

EnvConfig fixed_config(double dr0, std::uint64_t seed) {
  auto c = EnvConfig::standard(dr0, seed);
  c.screen_mode = ScreenMode::fixed_per_run;
  return c;
}

}  // namespace

TEST(EnvConfig, EpisodeLengthRules) {
  auto c = EnvConfig::standard(5.0, 1);
  for (int n : {30, 50, 100}) {
    c.episode_length = n;
    EXPECT_NO_THROW(c.validate());
  }
  c.episode_length = 40;
  EXPECT_THROW(c.validate(), ConfigError);
  c.allow_any_episode_length = true;
  EXPECT_NO_THROW(c.validate());
  c.episode_length = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Environment, FixedScreenResetsAreIdentical) {
  Environment env(fixed_config(5.0, 3));
  const auto a = env.reset(0);
  const auto b = env.reset(17);
  EXPECT_EQ(a.observation.q, b.observation.q);
  EXPECT_TRUE(env.screen_for_episode(0).values == env.screen_for_episode(9).values);
}

TEST(Environment, ResampledScreensDiffer) {
  Environment env(EnvConfig::standard(5.0, 3));
  EXPECT_FALSE(env.screen_for_episode(0).values == env.screen_for_episode(1).values);
  EXPECT_TRUE(env.screen_for_episode(4).values == env.screen_for_episode(4).values);
}

TEST(Environment, NoTurbulenceGivesReferenceObservation) {
  Environment env(EnvConfig::standard(0.0, 1));
  const auto r = env.reset(0);
  const auto& ref = env.components().bench.reference_observation();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.observation.q[i], ref.q[i], 1e-12);
  EXPECT_NEAR(r.observation.q[0], r.observation.q[3], 1e-12);
}

TEST(Environment, ZeroActionKeepsUncorrectedReward) {
  Environment env(fixed_config(5.0, 4));
  const auto r = env.reset(0);
  const std::vector<double> zero(64, 0.0);
  const auto s = env.step(zero);
  EXPECT_EQ(s.reward, r.info.strehl_direct);
  EXPECT_EQ(s.observation.q, r.observation.q);
}

TEST(Environment, UncorrectedStrehlAtModerateSeverity) {
  double sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    Environment env(fixed_config(5.0, derive_seed(7, k)));
    sum += env.reset(0).info.strehl_direct;
  }
  EXPECT_GE(sum / 20, 0.02);
  EXPECT_LE(sum / 20, 0.10);
}

TEST(Environment, OracleCommandReachesCeiling) {
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) {
    Environment env(fixed_config(5.0, derive_seed(7, k)));
    env.reset(0);
    const auto cmd = env.oracle_command();
    sum += env.step({cmd.values.data(), 64}).reward;
  }
  EXPECT_GE(sum / 5, 0.8);
}

TEST(Environment, EpisodeEndsAfterExactLength) {
  Environment env(fixed_config(5.0, 5));
  RandomStream rng(1, 0);
  env.reset(0);
  for (int i = 0; i < 30; ++i) {
    const auto s = env.step(random_action(rng));
    EXPECT_EQ(s.done, i == 29);
    EXPECT_GT(s.reward, 0.0);
    EXPECT_LE(s.reward, 1.0);
  }
  EXPECT_TRUE(env.done());
  EXPECT_THROW(env.step(random_action(rng)), ProtocolError);
}

TEST(Environment, StepBeforeResetRejected) {
  Environment env(fixed_config(5.0, 5));
  EXPECT_THROW(env.step(std::vector<double>(64, 0.0)), ProtocolError);
}

TEST(Environment, WrongActionLengthRejected) {
  Environment env(fixed_config(5.0, 5));
  env.reset(0);
  EXPECT_THROW(env.step(std::vector<double>(63, 0.0)), DimensionError);
}

TEST(Environment, NanActionFlaggedAndZeroed) {
  Environment env(fixed_config(5.0, 5));
  env.reset(0);
  std::vector<double> a(64, 0.0);
  a[10] = std::numeric_limits<double>::quiet_NaN();
  const auto s = env.step(a);
  EXPECT_TRUE(s.info.action_had_nan);
  EXPECT_EQ(env.state().command.values[10], 0.0);
}

TEST(Environment, MarkovInScreen) {
  Environment env(fixed_config(5.0, 6));
  RandomStream rng(2, 0);
  const auto target = random_action(rng);
  env.reset(0);
  const auto direct = env.step(target);
  env.reset(0);
  for (int i = 0; i < 5; ++i) env.step(random_action(rng, 1.0));
  const auto after_history = env.step(target);
  EXPECT_EQ(direct.reward, after_history.reward);
  EXPECT_EQ(direct.observation.q, after_history.observation.q);
}

TEST(Environment, TrajectoryIsDeterministic) {
  auto run = [] {
    Environment env(EnvConfig::standard(5.0, 9));
    RandomStream rng(3, 0);
    std::vector<double> rewards;
    env.reset(2);
    while (!env.done()) rewards.push_back(env.step(random_action(rng)).reward);
    return rewards;
  };
  EXPECT_EQ(run(), run());
}

TEST(Environment, SharedComponentsMustMatch) {
  Environment a(fixed_config(5.0, 1));
  auto other = fixed_config(5.0, 1);
  other.dm = DMConfig::for_aperture(0.5, 6);
  EXPECT_THROW(Environment(other, a.shared_components()), ConfigError);
  EXPECT_NO_THROW(Environment(fixed_config(5.0, 2), a.shared_components()));
}

TEST(TrajectoryLog, WritesFrozenHeader) {
  const auto dir = aorl::testing::scratch_dir("trajlog");
  Environment env(fixed_config(5.0, 1));
  env.reset(0);
  {
    TrajectoryLog log(dir / "t.csv");
    log.append("r", 0, 0, 0, env.step(std::vector<double>(64, 0.0)), 0.0);
  }
  std::ifstream in(dir / "t.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, TrajectoryLog::kHeader);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
}

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "aorl/errors.hpp"
#include "aorl/experiment.hpp"
#include "aorl/manifest.hpp"
#include "aorl/map_io.hpp"
#include "aorl/svg_chart.hpp"
#include "test_support.hpp"

using namespace aorl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec tiny(Algorithm a, const fs::path& out, int trials = 2, int episodes = 4) {
  ExperimentSpec s;
  s.run_id = "tiny";
  s.set_algorithm(a);
  s.n_trials = trials;
  s.episodes = episodes;
  s.threads = 1;
  s.output_dir = out;
  return s;
}

bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

}  // namespace

TEST(Manifest, GitBlobHashKnownAnswer) {
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Manifest, DetectsTamperingMissingAndExtraFiles) {
  const auto dir = aorl::testing::scratch_dir("manifest");
  std::ofstream(dir / "a.txt") << "alpha";
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "sub" / "b.txt") << "beta";
  const auto listed = hash_tree(dir);
  ASSERT_EQ(listed.size(), 2u);
  EXPECT_EQ(listed[1].path, "sub/b.txt");
  EXPECT_TRUE(check_tree(dir, listed).empty());

  std::ofstream(dir / "a.txt") << "alphA";
  std::ofstream(dir / "c.txt") << "new";
  fs::remove(dir / "sub" / "b.txt");
  const auto problems = check_tree(dir, listed);
  ASSERT_EQ(problems.size(), 3u);
  std::map<std::string, std::string> by_path;
  for (const auto& p : problems) by_path[p.path] = p.issue;
  EXPECT_EQ(by_path["a.txt"], "modified");
  EXPECT_EQ(by_path["sub/b.txt"], "missing");
  EXPECT_EQ(by_path["c.txt"], "unlisted");
}

TEST(Spec, JsonRoundTrip) {
  ExperimentSpec s;
  s.run_id = "abc-1";
  s.set_algorithm(Algorithm::sac);
  s.d_over_r0 = 7.5;
  s.seed = 99;
  s.screen_mode = ScreenMode::resample_per_episode;
  s.reward = RewardKind::mahajan;
  s.train.actor_lr = 1.25e-3;
  const auto back = spec_from_json(spec_to_json(s));
  EXPECT_EQ(spec_to_json(back), spec_to_json(s));
  EXPECT_EQ(back.algorithm, Algorithm::sac);
  EXPECT_EQ(back.train.actor_lr, 1.25e-3);
  EXPECT_EQ(back.screen_mode, ScreenMode::resample_per_episode);
  EXPECT_THROW(spec_from_json("{\"run_id\": 3"), InputError);
}

TEST(Spec, RunIdSafety) {
  EXPECT_TRUE(is_safe_run_id("ppo5_a-1.x"));
  EXPECT_FALSE(is_safe_run_id(""));
  EXPECT_FALSE(is_safe_run_id(".hidden"));
  EXPECT_FALSE(is_safe_run_id("a/b"));
  EXPECT_FALSE(is_safe_run_id("a b"));
  ExperimentSpec s;
  s.run_id = "../x";
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Spec, TrialSeedsAreDistinctAndPaired) {
  ExperimentSpec a, b;
  b.set_algorithm(Algorithm::shack_hartmann);
  EXPECT_NE(a.trial_seed(0), a.trial_seed(1));
  EXPECT_EQ(a.env_for_trial(3).seed, b.env_for_trial(3).seed);
}

TEST(Threads, EnvironmentVariable) {
  ::setenv("AORL_THREADS", "3", 1);
  EXPECT_EQ(default_thread_count(), 3);
  ::setenv("AORL_THREADS", "zero", 1);
  EXPECT_THROW(default_thread_count(), ConfigError);
  ::setenv("AORL_THREADS", "-2", 1);
  EXPECT_THROW(default_thread_count(), ConfigError);
  ::unsetenv("AORL_THREADS");
  EXPECT_GE(default_thread_count(), 1);
}

TEST(Stats, Describe) {
  const auto s = describe({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_NEAR(s.std, std::sqrt(1.25), 1e-15);
  EXPECT_EQ(s.count, 4);
}

TEST(Stats, BootstrapSeparatesShiftedSamples) {
  std::vector<double> a, b;
  for (int i = 0; i < 20; ++i) {
    a.push_back(0.6 + 0.01 * (i % 5));
    b.push_back(0.1 + 0.01 * (i % 5));
  }
  EXPECT_EQ(bootstrap_greater(a, b, 1000, 1), 1.0);
  EXPECT_EQ(bootstrap_greater(b, a, 1000, 1), 0.0);
  EXPECT_NEAR(bootstrap_greater(a, a, 2000, 1), 0.5, 0.1);
}

TEST(Svg, ChartIsWellFormed) {
  const auto svg = band_chart_svg({{"ppo", {0, 1, 2}, {0.1, 0.3, 0.5}, {0.01, 0.02, 0.03}}},
                                  {"title <&>", "episode", "Strehl"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("polygon"), std::string::npos);
  EXPECT_EQ(svg.find("<&>"), std::string::npos);
}

TEST(Run, WritesArtifactsAndVerifies) {
  const auto dir = aorl::testing::scratch_dir("run_ppo");
  const auto art = run_experiment(tiny(Algorithm::ppo, dir / "r"));
  ASSERT_EQ(art.trials.size(), 2u);
  EXPECT_EQ(art.summary.n_failed, 0);
  for (const char* f : {"curves.csv", "trials.csv", "summary.json", "spec.json",
                        "learning_curve.svg", "manifest.json", "checkpoints/trial_000.json",
                        "checkpoints/trial_000.bin"}) {
    EXPECT_TRUE(fs::exists(dir / "r" / f)) << f;
  }
  const auto checks = verify_run(dir / "r");
  EXPECT_TRUE(all_passed(checks));

  std::ofstream(dir / "r" / "trials.csv", std::ios::app) << "x";
  const auto tampered = verify_run(dir / "r");
  EXPECT_FALSE(tampered.front().passed);
  EXPECT_EQ(tampered.front().name, "manifest_hashes");
}

TEST(Run, CurvesAreBitReproducibleAndThreadIndependent) {
  const auto dir = aorl::testing::scratch_dir("run_repro");
  auto s = tiny(Algorithm::ppo, dir / "a", 3, 4);
  run_experiment(s);
  s.output_dir = dir / "b";
  run_experiment(s);
  s.output_dir = dir / "c";
  s.threads = 3;
  run_experiment(s);
  const auto a = slurp(dir / "a" / "curves.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "curves.csv"));
  EXPECT_EQ(a, slurp(dir / "c" / "curves.csv"));
}

TEST(Run, UnwritableOutputIsIoError) {
  const auto dir = aorl::testing::scratch_dir("run_io");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(run_experiment(tiny(Algorithm::zero_policy, dir / "file" / "r")), IoError);
}

TEST(Sweep, VanishingTurbulenceIsNearPerfect) {
  const auto dir = aorl::testing::scratch_dir("sweep_flat");
  const auto pts = severity_sweep(tiny(Algorithm::zero_policy, dir, 3), {0.01});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_GE(pts[0].summary.converged.mean, 0.95);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "sweep.svg"));
  EXPECT_TRUE(all_passed(verify_run(dir)));
}

TEST(Sweep, SingleRatioMatchesPlainRun) {
  const auto dir = aorl::testing::scratch_dir("sweep_same");
  auto s = tiny(Algorithm::ppo, dir / "sweep", 2, 4);
  severity_sweep(s, {5.0});
  s.output_dir = dir / "plain";
  run_experiment(s);
  EXPECT_EQ(slurp(dir / "sweep" / "dr0_5" / "curves.csv"), slurp(dir / "plain" / "curves.csv"));
  EXPECT_THROW(severity_sweep(s, {}), ConfigError);
  EXPECT_THROW(severity_sweep(s, {-1.0}), ConfigError);
}

TEST(Render, MapsAndAnnotations) {
  const auto dir = aorl::testing::scratch_dir("render");
  run_experiment(tiny(Algorithm::ppo, dir / "r", 1, 4));
  const auto maps = render_power_maps(dir / "r", kRenderStages, 0, dir / "maps");
  ASSERT_EQ(maps.size(), kRenderStages.size());
  std::map<std::string, double> strehl;
  for (const auto& m : maps) {
    EXPECT_TRUE(fs::exists(m.path));
    EXPECT_TRUE(fs::exists(m.path.string() + ".json"));
    strehl[m.stage] = m.strehl_direct;
  }
  EXPECT_LT(strehl["uncorrected"], 0.1);
  EXPECT_GT(strehl["sh"], strehl["uncorrected"]);
  EXPECT_GT(strehl["oracle"], strehl["sh"] - 1e-9);
  EXPECT_GT(strehl["oracle"], 0.5);
  const auto px = read_pgm(maps.front().path);
  EXPECT_EQ(px.rows(), 64);

  fs::remove(dir / "r" / "checkpoints" / "trial_000.json");
  EXPECT_THROW(render_power_maps(dir / "r", {"policy"}, 0, dir / "maps"), InputError);
  EXPECT_THROW(render_power_maps(dir / "r", {"bogus"}, 0, dir / "maps"), ConfigError);
}

TEST(Verify, MissingRunIsInputError) {
  EXPECT_THROW(verify_run("/nonexistent/aorl/run"), InputError);
}

TEST(Invariants, SuitePasses) {
  for (const auto& c : invariant_suite()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

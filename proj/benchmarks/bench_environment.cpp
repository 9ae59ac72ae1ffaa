#include <vector>

#include <benchmark/benchmark.h>

#include "aorl/environment.hpp"
#include "aorl/random.hpp"
#include "aorl/shack_hartmann.hpp"

using namespace aorl;

static void BM_EnvironmentStep(benchmark::State& state) {
  auto cfg = EnvConfig::standard(5.0, 1);
  cfg.screen_mode = ScreenMode::fixed_per_run;
  Environment env(cfg);
  RandomStream rng(1, 0);
  std::vector<double> action(64);
  for (auto& a : action) a = rng.uniform(-0.2, 0.2);
  env.reset(0);
  for (auto _ : state) {
    if (env.done()) env.reset(0);
    benchmark::DoNotOptimize(env.step(action));
  }
}
BENCHMARK(BM_EnvironmentStep);

static void BM_ShackHartmannLoop(benchmark::State& state) {
  const auto cfg = EnvConfig::standard(5.0, 1);
  const EnvComponents parts(cfg);
  const LensletArray lenslets(LensletConfig{}, cfg.optics.pupil, cfg.optics.aperture_diameter);
  const auto rec = calibrate(parts.dm, lenslets, cfg.optics.wavelength);
  const ShackHartmannLoop loop(parts.dm, lenslets, rec, parts.bench);
  Environment env(cfg);
  const auto screen = env.screen_for_episode(0);
  for (auto _ : state) benchmark::DoNotOptimize(loop.run(screen, 0.5, 20));
}
BENCHMARK(BM_ShackHartmannLoop)->Unit(benchmark::kMillisecond);

static void BM_Calibration(benchmark::State& state) {
  const auto cfg = EnvConfig::standard(5.0, 1);
  const DeformableMirror dm(cfg.dm, cfg.optics.pupil);
  const LensletArray lenslets(LensletConfig{}, cfg.optics.pupil, cfg.optics.aperture_diameter);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(dm, lenslets, cfg.optics.wavelength));
}
BENCHMARK(BM_Calibration)->Unit(benchmark::kMillisecond);

#include <benchmark/benchmark.h>

#include "aorl/optics.hpp"
#include "aorl/random.hpp"
#include "aorl/turbulence.hpp"

using namespace aorl;

static void BM_FocalPropagation(benchmark::State& state) {
  OpticalConfig oc;
  oc.pupil = pupil_grid(static_cast<int>(state.range(0)), 0.55);
  const FocalPropagator prop(oc.pupil, oc.focal, oc.aperture_diameter);
  const auto screen = generate_screen(oc.pupil, TurbulenceConfig::from_severity(5.0, 0.5, 1), 0.5);
  const auto field = apply_phase(circular_aperture(oc.pupil, 0.5), screen);
  for (auto _ : state) benchmark::DoNotOptimize(prop.propagate(field));
}
BENCHMARK(BM_FocalPropagation)->Arg(64)->Arg(128)->Arg(256);

static void BM_CompleteGridPropagation(benchmark::State& state) {
  const OpticalConfig oc;
  const FocalPropagator prop(oc.pupil, complete_focal_grid(oc.pupil, 0.5), 0.5);
  const auto field = circular_aperture(oc.pupil, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(prop.propagate(field));
}
BENCHMARK(BM_CompleteGridPropagation);

static void BM_ScreenGeneration(benchmark::State& state) {
  const OpticalConfig oc;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_screen(oc.pupil, TurbulenceConfig::from_severity(5.0, 0.5, ++seed), 0.5));
  }
}
BENCHMARK(BM_ScreenGeneration);

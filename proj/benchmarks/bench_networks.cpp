#include <benchmark/benchmark.h>

#include "aorl/mlp.hpp"
#include "aorl/random.hpp"

using namespace aorl;

static Eigen::MatrixXd batch(int rows, int cols) {
  RandomStream rng(2, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

static void BM_MlpForward(benchmark::State& state) {
  RandomStream rng(1, 0);
  Mlp net({4, static_cast<int>(state.range(0)), 64});
  net.initialize(rng);
  const auto x = batch(4, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward)->Args({150, 1})->Args({150, 60})->Args({250, 64});

static void BM_MlpForwardBackward(benchmark::State& state) {
  RandomStream rng(1, 0);
  Mlp net({4, static_cast<int>(state.range(0)), 64});
  net.initialize(rng);
  const auto x = batch(4, static_cast<int>(state.range(1)));
  const auto g = batch(64, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Mlp::Cache cache;
    net.forward(x, cache);
    Eigen::VectorXd grad;
    benchmark::DoNotOptimize(net.backward(cache, g, grad));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Args({150, 60})->Args({250, 64});

static void BM_AdamStep(benchmark::State& state) {
  RandomStream rng(1, 0);
  Mlp net({4, 150, 64});
  net.initialize(rng);
  Adam opt(net.parameter_count(), 1e-2);
  const Eigen::VectorXd g = batch(static_cast<int>(net.parameter_count()), 1);
  for (auto _ : state) opt.step(net.parameters(), g);
}
BENCHMARK(BM_AdamStep);

BENCHMARK_MAIN();

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aorl/bench.hpp"
#include "aorl/errors.hpp"
#include "aorl/random.hpp"
#include "aorl/sensing.hpp"
#include "aorl/turbulence.hpp"

using namespace aorl;

namespace {

PhaseScreen ramp(const SamplingGrid& g, double gx, double gy) {
  PhaseScreen p(g);
  for (int r = 0; r < g.n_samples; ++r)
    for (int c = 0; c < g.n_samples; ++c) p.values(r, c) = gx * g.coordinate(c) + gy * g.coordinate(r);
  return p;
}

}  // namespace

TEST(Quadrants, UnaberratedIsSymmetric) {
  const OpticalBench bench{OpticalConfig{}};
  const auto obs = bench.measure(PhaseScreen(bench.config().pupil)).observation;
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(obs.q[i], obs.q[0], 1e-12);
  // The window holds most, not all, of the diffraction-limited power.
  EXPECT_GT(obs.total(), 0.95);
  EXPECT_LT(obs.total(), 1.0);
}

TEST(Quadrants, TiltMovesPowerSideways) {
  const OpticalBench bench{OpticalConfig{}};
  const double d = bench.config().aperture_diameter;
  // Half a wave across the aperture towards +x.
  const auto obs = bench.measure(ramp(bench.config().pupil, std::numbers::pi / d, 0.0)).observation;
  EXPECT_GT(obs.q[upper_right], obs.q[upper_left]);
  EXPECT_GT(obs.q[lower_right], obs.q[lower_left]);
  EXPECT_NEAR(obs.q[upper_right], obs.q[lower_right], 1e-12);
  const auto down = bench.measure(ramp(bench.config().pupil, 0.0, std::numbers::pi / d)).observation;
  EXPECT_GT(down.q[lower_left], down.q[upper_left]);
}

TEST(Strehl, FlatWavefrontIsOne) {
  const OpticalBench bench{OpticalConfig{}};
  const auto r = bench.measure(PhaseScreen(bench.config().pupil));
  EXPECT_NEAR(r.strehl_direct, 1.0, 1e-12);
  EXPECT_NEAR(r.strehl_mahajan, 1.0, 1e-12);
  EXPECT_NEAR(r.residual_rms, 0.0, 1e-12);
}

TEST(Strehl, PistonDoesNotMatter) {
  const OpticalBench bench{OpticalConfig{}};
  PhaseScreen p(bench.config().pupil);
  p.values.setConstant(1.3);
  const auto r = bench.measure(p);
  EXPECT_NEAR(r.strehl_direct, 1.0, 1e-12);
  EXPECT_NEAR(r.strehl_mahajan, 1.0, 1e-12);
}

TEST(Strehl, LargeTiltDropsDirectStrehl) {
  const OpticalBench bench{OpticalConfig{}};
  const double d = bench.config().aperture_diameter;
  const auto r = bench.measure(ramp(bench.config().pupil, 2.0 * std::numbers::pi * 4.0 / d, 0.0));
  EXPECT_LT(r.strehl_direct, 0.05);
  EXPECT_GT(r.strehl_direct, 0.0);
}

TEST(Strehl, DirectClippedToUnitInterval) {
  RealMap m = RealMap::Zero(8, 8);
  m(4, 4) = 2.0;
  EXPECT_EQ(strehl_direct(m, 1.0).value, 1.0);
  m(4, 4) = 0.0;
  EXPECT_GT(strehl_direct(m, 1.0).value, 0.0);
}

TEST(Strehl, MahajanRejectsEmptyAperture) {
  const OpticalConfig oc;
  ScalarField empty(oc.pupil);
  EXPECT_THROW(strehl_mahajan(PhaseScreen(oc.pupil), empty), ConfigError);
}

TEST(Strehl, MahajanAgreesWithDirectInSmallAberrationRegime) {
  const OpticalBench bench{OpticalConfig{}};
  const auto& grid = bench.config().pupil;
  RandomStream rng(8, 0);
  int agree = 0;
  const int n = 100;
  for (int k = 0; k < n; ++k) {
    auto screen = generate_screen(grid, TurbulenceConfig::from_severity(2.0, 0.5, 1000 + k), 0.5);
    const double var = aperture_phase_variance(screen, 0.5);
    const double target = rng.uniform(0.01, 0.5);
    screen = std::sqrt(target / var) * screen;
    const auto r = bench.measure(screen);
    ASSERT_LE(r.residual_rms * r.residual_rms, 0.5 + 1e-9);
    if (std::abs(r.strehl_mahajan - r.strehl_direct) <= 0.15 * r.strehl_direct) ++agree;
  }
  EXPECT_GE(agree, 95);
}

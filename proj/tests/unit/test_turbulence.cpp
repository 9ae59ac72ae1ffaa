#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "aorl/errors.hpp"
#include "aorl/optics.hpp"
#include "aorl/random.hpp"
#include "aorl/turbulence.hpp"

using namespace aorl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<PhaseScreen> kolmogorov_screens(double r0, int count, std::uint64_t base) {
  const OpticalConfig oc;
  std::vector<PhaseScreen> out;
  for (int i = 0; i < count; ++i) {
    TurbulenceConfig t;
    t.fried_parameter = r0;
    t.outer_scale = kInf;
    // an infinite outer scale needs subharmonics well below 1/D
    t.subharmonic_levels = 10;
    t.seed = derive_seed(base, static_cast<std::uint64_t>(i));
    out.push_back(generate_screen(oc.pupil, t, oc.aperture_diameter));
  }
  return out;
}

// D(r) = 2 * int 2 pi f PSD(f) (1 - J0(2 pi f r)) df, in log-spaced quadrature.
double von_karman_structure(double r, const TurbulenceConfig& t) {
  const int n = 20000;
  const double lo = std::log(1e-6), hi = std::log(1e4);
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = std::exp(lo + (i + 0.5) * h);
    sum += 2.0 * std::numbers::pi * f * phase_psd(f, t) *
           (1.0 - std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * f * r)) * f * h;
  }
  return 2.0 * sum;
}

}  // namespace

TEST(PhasePsd, MatchesVonKarmanForm) {
  TurbulenceConfig t;
  t.fried_parameter = 0.1;
  t.outer_scale = 25.0;
  const double f = 3.0;
  const double want = 0.023 * std::pow(0.1, -5.0 / 3.0) * std::pow(f * f + 1.0 / 625.0, -11.0 / 6.0);
  EXPECT_NEAR(phase_psd(f, t), want, 1e-12 * want);
  EXPECT_EQ(phase_psd(0.0, t), 0.0);
}

TEST(PhasePsd, KolmogorovLimit) {
  TurbulenceConfig t;
  t.fried_parameter = 0.2;
  t.outer_scale = kInf;
  const double f = 0.5;
  EXPECT_NEAR(phase_psd(f, t), 0.023 * std::pow(0.2, -5.0 / 3.0) * std::pow(f, -11.0 / 3.0),
              1e-12 * phase_psd(f, t));
}

TEST(Screen, InfiniteFriedParameterIsFlat) {
  const OpticalConfig oc;
  const auto s = generate_screen(oc.pupil, TurbulenceConfig::none(), oc.aperture_diameter);
  EXPECT_EQ(s.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Screen, DeterministicInSeed) {
  const OpticalConfig oc;
  const auto cfg = TurbulenceConfig::from_severity(5.0, oc.aperture_diameter, 123);
  const auto a = generate_screen(oc.pupil, cfg, oc.aperture_diameter);
  const auto b = generate_screen(oc.pupil, cfg, oc.aperture_diameter);
  EXPECT_TRUE(a.values == b.values);
  auto other = cfg;
  other.seed = 124;
  EXPECT_FALSE(a.values == generate_screen(oc.pupil, other, oc.aperture_diameter).values);
}

TEST(Screen, PistonRemovedOverAperture) {
  const OpticalConfig oc;
  const auto s = generate_screen(oc.pupil, TurbulenceConfig::from_severity(5.0, 0.5, 9), 0.5);
  const auto mask = circular_aperture(oc.pupil, 0.5).amplitude.real();
  const double mean = (s.values.array() * mask.array()).sum() / mask.sum();
  EXPECT_NEAR(mean, 0.0, 1e-10);
  EXPECT_TRUE(s.all_finite());
}

TEST(Screen, SeverityMapsToFriedParameter) {
  const auto t = TurbulenceConfig::from_severity(5.0, 0.5, 1);
  EXPECT_DOUBLE_EQ(t.fried_parameter, 0.1);
  EXPECT_DOUBLE_EQ(t.d_over_r0(0.5), 5.0);
}

TEST(Screen, RejectsBadConfig) {
  TurbulenceConfig t;
  t.fried_parameter = -1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t.fried_parameter = 0.1;
  t.outer_scale = 0.0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Screen, StructureFunctionAtFriedParameter) {
  const double r0 = 0.1;
  const auto screens = kolmogorov_screens(r0, 200, 2024);
  const std::vector<double> seps = {r0};
  const double d = structure_function(screens, seps, 0.5)[0];
  const OpticalConfig oc;
  const double r = realized_separation(oc.pupil, r0);
  const double want = 6.88 * std::pow(r / r0, 5.0 / 3.0);
  EXPECT_NEAR(d, want, 0.15 * want);
}

TEST(Screen, StructureFunctionScalesWithFriedParameter) {
  const double sep = 0.08;
  const std::vector<double> seps = {sep};
  const double d1 = structure_function(kolmogorov_screens(0.1, 100, 5), seps, 0.5)[0];
  const double d2 = structure_function(kolmogorov_screens(0.05, 100, 6), seps, 0.5)[0];
  const double want = std::pow(2.0, 5.0 / 3.0);
  EXPECT_NEAR(d2 / d1, want, 0.2 * want);
}

TEST(Screen, DefaultConfigFollowsVonKarmanTheory) {
  const OpticalConfig oc;
  TurbulenceConfig t;
  t.fried_parameter = 0.1;
  std::vector<PhaseScreen> screens;
  for (int i = 0; i < 200; ++i) {
    t.seed = derive_seed(99, static_cast<std::uint64_t>(i));
    screens.push_back(generate_screen(oc.pupil, t, oc.aperture_diameter));
  }
  const std::vector<double> seps = {0.02, 0.1, 0.2};
  const auto d = structure_function(screens, seps, 0.5);
  for (std::size_t k = 0; k < seps.size(); ++k) {
    const double want = von_karman_structure(realized_separation(oc.pupil, seps[k]), t);
    EXPECT_NEAR(d[k], want, 0.15 * want) << "separation " << seps[k];
  }
}

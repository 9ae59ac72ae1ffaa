#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aorl/errors.hpp"
#include "aorl/optics.hpp"
#include "aorl/random.hpp"

using namespace aorl;

namespace {

PhaseScreen tilt_x(const SamplingGrid& grid, double waves_across, double diameter) {
  PhaseScreen p(grid);
  for (int r = 0; r < grid.n_samples; ++r) {
    for (int c = 0; c < grid.n_samples; ++c) {
      p.values(r, c) = 2.0 * std::numbers::pi * waves_across * grid.coordinate(c) / diameter;
    }
  }
  return p;
}

Eigen::Index argmax_col(const RealMap& m) {
  Eigen::Index r = 0, c = 0;
  m.maxCoeff(&r, &c);
  return c;
}

}  // namespace

TEST(Grid, ValidationRejectsBadSampling) {
  EXPECT_THROW(pupil_grid(15, 1.0).validate(), ConfigError);
  EXPECT_THROW(pupil_grid(8, 1.0).validate(), ConfigError);
  EXPECT_THROW(pupil_grid(64, 0.0).validate(), ConfigError);
  EXPECT_NO_THROW(pupil_grid(64, 1.0).validate());
}

TEST(Grid, OpticalAxisOnCenterSample) {
  const auto g = pupil_grid(128, 0.55);
  EXPECT_EQ(g.coordinate(g.center()), 0.0);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -0.275);
}

TEST(Aperture, AreaMatchesDisc) {
  const auto g = pupil_grid(256, 0.55);
  const auto a = circular_aperture(g, 0.5);
  const double area = a.total_power();
  EXPECT_NEAR(area, std::numbers::pi * 0.25 * 0.25, 0.01 * std::numbers::pi * 0.0625);
}

TEST(Propagation, ParsevalOnCompleteGrid) {
  const OpticalConfig oc;
  const SamplingGrid focal = complete_focal_grid(oc.pupil, oc.aperture_diameter);
  const FocalPropagator prop(oc.pupil, focal, oc.aperture_diameter);
  RandomStream rng(11, 0);
  for (int k = 0; k < 10; ++k) {
    ScalarField f(oc.pupil);
    for (Eigen::Index r = 0; r < f.amplitude.rows(); ++r)
      for (Eigen::Index c = 0; c < f.amplitude.cols(); ++c)
        f.amplitude(r, c) = {rng.normal(), rng.normal()};
    const double pin = f.total_power();
    EXPECT_NEAR(prop.propagate(f).total_power(), pin, 1e-9 * pin);
  }
}

TEST(Propagation, AiryFirstDarkRing) {
  const OpticalConfig oc;
  const auto focal = focal_grid(256, 8.0);  // 32 samples per diffraction width
  const FocalPropagator prop(oc.pupil, focal, oc.aperture_diameter);
  const RealMap p = power_map(prop.propagate(circular_aperture(oc.pupil, oc.aperture_diameter)));
  const int c = focal.center();
  // First minimum along +x between 1.0 and 1.5 widths.
  int best = c;
  double lowest = p(c, c);
  for (int i = c + static_cast<int>(1.0 / focal.spacing());
       i <= c + static_cast<int>(1.5 / focal.spacing()); ++i) {
    if (p(c, i) < lowest) {
      lowest = p(c, i);
      best = i;
    }
  }
  EXPECT_NEAR(focal.coordinate(best), 1.22, 0.05);
  EXPECT_LT(lowest, 1e-3 * p(c, c));
  EXPECT_EQ(argmax_col(p), c);
}

TEST(Propagation, TiltShiftsPeakByWaves) {
  const OpticalConfig oc;
  const FocalPropagator prop(oc.pupil, oc.focal, oc.aperture_diameter);
  const auto ap = circular_aperture(oc.pupil, oc.aperture_diameter);
  for (int k : {1, 2, -3}) {
    const RealMap p =
        power_map(prop.propagate(apply_phase(ap, tilt_x(oc.pupil, k, oc.aperture_diameter))));
    EXPECT_NEAR(oc.focal.coordinate(static_cast<int>(argmax_col(p))), k, 1e-9) << k;
  }
}

TEST(Propagation, OnAxisMatchesFullPropagation) {
  const OpticalConfig oc;
  const FocalPropagator prop(oc.pupil, oc.focal, oc.aperture_diameter);
  auto f = apply_phase(circular_aperture(oc.pupil, oc.aperture_diameter),
                       tilt_x(oc.pupil, 0.3, oc.aperture_diameter));
  const auto full = prop.propagate(f);
  const Complex direct = prop.on_axis(f);
  const int c = oc.focal.center();
  EXPECT_NEAR(std::abs(full.amplitude(c, c) - direct), 0.0, 1e-12 * std::abs(direct));
}

TEST(Propagation, RejectsNonFiniteField) {
  const OpticalConfig oc;
  auto f = circular_aperture(oc.pupil, oc.aperture_diameter);
  f.amplitude(3, 3) = {std::nan(""), 0.0};
  EXPECT_THROW(propagate_to_focus(f, oc), InputError);
}

TEST(Propagation, RejectsMismatchedGrid) {
  const OpticalConfig oc;
  const FocalPropagator prop(oc.pupil, oc.focal, oc.aperture_diameter);
  const auto f = circular_aperture(pupil_grid(64, 0.55), 0.5);
  EXPECT_THROW((void)prop.propagate(f), DimensionError);
}

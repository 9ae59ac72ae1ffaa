#pragma once

#include <array>

#include "aorl/field.hpp"

namespace aorl {

/// Normalized quadrant powers in the order upper-left, upper-right,
/// lower-left, lower-right. "Upper" means negative y (row 0 side).
struct QuadrantObservation {
  std::array<double, 4> q{};

  [[nodiscard]] double total() const { return q[0] + q[1] + q[2] + q[3]; }
};

enum Quadrant { upper_left = 0, upper_right = 1, lower_left = 2, lower_right = 3 };

struct StrehlValue {
  double value = 1.0;
};

/// Smallest Strehl reported; keeps values inside (0, 1].
inline constexpr double kStrehlFloor = 1e-300;

/// Sums focal power over the four quadrants of a centered square window of
/// side `window_widths` diffraction widths. Samples on the central row or
/// column are split evenly between neighbouring quadrants. Each sum is divided
/// by reference_total (total focal power of the unaberrated system, with the
/// same cell weighting).
QuadrantObservation quadrant_observation(const RealMap& focal_power, const SamplingGrid& focal,
                                         double reference_total, double window_widths = 8.0);

/// exp(-sigma^2), sigma^2 the power-weighted, piston-removed phase variance
/// over the aperture. Throws ConfigError for an empty mask.
StrehlValue strehl_mahajan(const PhaseScreen& residual, const ScalarField& aperture);

/// Central focal sample over the ideal on-axis peak, clipped to (0, 1].
StrehlValue strehl_direct(const RealMap& focal_power, double ideal_peak);

}  // namespace aorl

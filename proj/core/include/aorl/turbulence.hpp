#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "aorl/field.hpp"

namespace aorl {

/// Von Karman turbulence parameters. r0 = +inf gives a flat screen;
/// outer_scale = +inf gives pure Kolmogorov statistics.
struct TurbulenceConfig {
  double fried_parameter = 0.1;  // r0 [m]
  double outer_scale = 25.0;     // L0 [m]
  std::uint64_t seed = 0;
  int subharmonic_levels = 3;
  /// The FFT screen is generated on oversample*n samples and cropped, which
  /// keeps the periodic wrap-around away from the pupil.
  int oversample = 2;

  [[nodiscard]] double d_over_r0(double aperture_diameter) const {
    return aperture_diameter / fried_parameter;
  }
  void validate() const;

  static TurbulenceConfig from_severity(double d_over_r0, double aperture_diameter,
                                        std::uint64_t seed);
  static TurbulenceConfig none() {
    TurbulenceConfig c;
    c.fried_parameter = std::numeric_limits<double>::infinity();
    return c;
  }
};

/// Phase power spectral density 0.023 r0^(-5/3) (f^2 + 1/L0^2)^(-11/6), with
/// f in cycles per meter. The f = 0 (piston) term is always zero.
double phase_psd(double frequency, const TurbulenceConfig& cfg);

/// One screen realization by FFT filtering of seeded white noise plus
/// subharmonic low-order augmentation. Piston is removed over the circular
/// aperture of the given diameter. Deterministic in (grid, cfg).
PhaseScreen generate_screen(const SamplingGrid& grid, const TurbulenceConfig& cfg,
                            double aperture_diameter);

enum class LagAxis { x, y, both };

/// <[phi(x + r) - phi(x)]^2> over all screens and all point pairs with both
/// ends inside the aperture. Each separation is rounded to the nearest whole
/// pixel lag; use realized_separation() to read the lag actually used.
std::vector<double> structure_function(std::span<const PhaseScreen> screens,
                                       std::span<const double> separations,
                                       double aperture_diameter, LagAxis axis = LagAxis::both);

double realized_separation(const SamplingGrid& grid, double separation);

/// Mean over the aperture of the piston-removed phase variance.
double aperture_phase_variance(const PhaseScreen& screen, double aperture_diameter);

}  // namespace aorl

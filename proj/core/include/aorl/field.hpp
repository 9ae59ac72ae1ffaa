#pragma once

#include <complex>

#include <Eigen/Core>

#include "aorl/errors.hpp"

namespace aorl {

using Complex = std::complex<double>;

/// Row-major maps: row index runs along y, column index along x. Row 0 is the
/// top of the image (most negative y).
using RealMap = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMap = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PlaneKind { pupil, focal };

/// Square sampling of an optical plane.
///
/// Pupil grids measure `extent` in meters. Focal grids measure it in
/// diffraction widths (lambda*f/D), which folds the focal length into the
/// coordinate scale. The optical axis sits on sample (n/2, n/2), so sample i
/// has coordinate (i - n/2) * spacing().
struct SamplingGrid {
  int n_samples = 128;
  double extent = 0.55;
  PlaneKind plane = PlaneKind::pupil;

  [[nodiscard]] double spacing() const { return extent / n_samples; }
  [[nodiscard]] double coordinate(int index) const { return (index - n_samples / 2) * spacing(); }
  [[nodiscard]] int center() const { return n_samples / 2; }
  [[nodiscard]] double cell_weight() const { return spacing() * spacing(); }

  /// Throws ConfigError unless n_samples >= 16, even, and extent > 0.
  void validate() const;

  friend bool operator==(const SamplingGrid&, const SamplingGrid&) = default;
};

SamplingGrid pupil_grid(int n_samples, double extent_m);
SamplingGrid focal_grid(int n_samples, double extent_diffraction_widths);

/// Complex optical amplitude; power density is |amplitude|^2.
struct ScalarField {
  SamplingGrid grid;
  ComplexMap amplitude;

  ScalarField() = default;
  ScalarField(SamplingGrid g, ComplexMap a);
  explicit ScalarField(SamplingGrid g);

  /// Sum of |amplitude|^2 times the grid cell weight.
  [[nodiscard]] double total_power() const;
};

/// Real phase map in radians over a pupil grid.
struct PhaseScreen {
  SamplingGrid grid;
  RealMap values;

  PhaseScreen() = default;
  PhaseScreen(SamplingGrid g, RealMap v);
  explicit PhaseScreen(SamplingGrid g);

  [[nodiscard]] bool all_finite() const { return values.allFinite(); }
};

PhaseScreen operator+(const PhaseScreen& a, const PhaseScreen& b);
PhaseScreen operator-(const PhaseScreen& a);
PhaseScreen operator*(double scale, const PhaseScreen& a);

}  // namespace aorl

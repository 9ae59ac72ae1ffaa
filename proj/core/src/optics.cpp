#include "aorl/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aorl {

void OpticalConfig::validate() const {
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  if (!(aperture_diameter > 0.0)) throw ConfigError("aperture diameter must be positive");
  pupil.validate();
  focal.validate();
  if (pupil.plane != PlaneKind::pupil || focal.plane != PlaneKind::focal) {
    throw ConfigError("optical config grids have the wrong plane kind");
  }
  if (aperture_diameter > pupil.extent) {
    throw ConfigError("aperture diameter exceeds the pupil grid extent");
  }
}

ScalarField circular_aperture(const SamplingGrid& grid, double diameter) {
  grid.validate();
  if (!(diameter > 0.0) || diameter > grid.extent) {
    throw ConfigError("aperture diameter must be in (0, grid extent]");
  }
  const double radius = diameter / 2.0;
  ScalarField mask(grid);
  for (int r = 0; r < grid.n_samples; ++r) {
    const double y = grid.coordinate(r);
    for (int c = 0; c < grid.n_samples; ++c) {
      const double x = grid.coordinate(c);
      if (std::hypot(x, y) <= radius) mask.amplitude(r, c) = 1.0;
    }
  }
  return mask;
}

ScalarField apply_phase(const ScalarField& field, const PhaseScreen& phase) {
  if (!(field.grid == phase.grid)) {
    throw DimensionError("field and phase screen live on different grids");
  }
  ScalarField out(field.grid);
  const Eigen::Index count = field.amplitude.size();
  const Complex* src = field.amplitude.data();
  const double* ph = phase.values.data();
  Complex* dst = out.amplitude.data();
  for (Eigen::Index i = 0; i < count; ++i) {
    if (src[i] == Complex{}) continue;
    dst[i] = src[i] * std::polar(1.0, ph[i]);
  }
  return out;
}

RealMap power_map(const ScalarField& field) { return field.amplitude.cwiseAbs2(); }

SamplingGrid complete_focal_grid(const SamplingGrid& pupil, double aperture_diameter) {
  return focal_grid(pupil.n_samples, aperture_diameter / pupil.spacing());
}

FocalPropagator::FocalPropagator(const SamplingGrid& pupil, const SamplingGrid& focal,
                                 double aperture_diameter)
    : pupil_(pupil), focal_(focal), diameter_(aperture_diameter) {
  pupil_.validate();
  focal_.validate();
  if (!(aperture_diameter > 0.0)) throw ConfigError("aperture diameter must be positive");
  // Per-axis factor dx/sqrt(D) gives sum|F|^2 dw^2 = sum|A|^2 dx^2 whenever
  // the focal grid is complete.
  const double scale = pupil_.spacing() / std::sqrt(diameter_);
  const int m = focal_.n_samples;
  const int n = pupil_.n_samples;
  kernel_.resize(m, n);
  for (int k = 0; k < m; ++k) {
    const double w = focal_.coordinate(k);
    for (int j = 0; j < n; ++j) {
      const double arg = -2.0 * std::numbers::pi * pupil_.coordinate(j) * w / diameter_;
      kernel_(k, j) = std::polar(scale, arg);
    }
  }
}

namespace {

struct Support {
  Eigen::Index row0 = 0, col0 = 0, rows = 0, cols = 0;
};

Support nonzero_support(const ComplexMap& a) {
  Eigen::Index r0 = a.rows(), r1 = -1, c0 = a.cols(), c1 = -1;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (a(r, c) != Complex{}) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
  }
  if (r1 < 0) return {};
  return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

}  // namespace

ScalarField FocalPropagator::propagate(const ScalarField& pupil_field) const {
  if (!(pupil_field.grid == pupil_)) {
    throw DimensionError("pupil field grid does not match the propagator");
  }
  if (!pupil_field.amplitude.allFinite()) {
    throw InputError("pupil field contains NaN or Inf");
  }
  ScalarField out(focal_);
  const Support s = nonzero_support(pupil_field.amplitude);
  if (s.rows == 0) return out;
  const auto block = pupil_field.amplitude.block(s.row0, s.col0, s.rows, s.cols);
  const ComplexMap tmp = kernel_.middleCols(s.row0, s.rows) * block;
  out.amplitude.noalias() = tmp * kernel_.middleCols(s.col0, s.cols).transpose();
  return out;
}

Complex FocalPropagator::on_axis(const ScalarField& pupil_field) const {
  if (!(pupil_field.grid == pupil_)) {
    throw DimensionError("pupil field grid does not match the propagator");
  }
  const double scale = pupil_.spacing() / std::sqrt(diameter_);
  return pupil_field.amplitude.sum() * scale * scale;
}

ScalarField propagate_to_focus(const ScalarField& pupil_field, const OpticalConfig& config) {
  if (pupil_field.grid.plane != PlaneKind::pupil) {
    throw DimensionError("propagate_to_focus expects a pupil-plane field");
  }
  const FocalPropagator prop(pupil_field.grid, config.focal, config.aperture_diameter);
  return prop.propagate(pupil_field);
}

}  // namespace aorl

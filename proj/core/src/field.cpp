#include "aorl/field.hpp"

#include <cmath>
#include <string>

namespace aorl {

void SamplingGrid::validate() const {
  if (n_samples < 16 || n_samples % 2 != 0) {
    throw ConfigError("sampling grid needs an even sample count >= 16, got " +
                      std::to_string(n_samples));
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw ConfigError("sampling grid extent must be positive and finite");
  }
}

SamplingGrid pupil_grid(int n_samples, double extent_m) {
  SamplingGrid g{n_samples, extent_m, PlaneKind::pupil};
  g.validate();
  return g;
}

SamplingGrid focal_grid(int n_samples, double extent_diffraction_widths) {
  SamplingGrid g{n_samples, extent_diffraction_widths, PlaneKind::focal};
  g.validate();
  return g;
}

ScalarField::ScalarField(SamplingGrid g, ComplexMap a) : grid(g), amplitude(std::move(a)) {
  if (amplitude.rows() != grid.n_samples || amplitude.cols() != grid.n_samples) {
    throw DimensionError("field amplitude shape does not match its grid");
  }
}

ScalarField::ScalarField(SamplingGrid g)
    : grid(g), amplitude(ComplexMap::Zero(g.n_samples, g.n_samples)) {}

double ScalarField::total_power() const {
  return amplitude.cwiseAbs2().sum() * grid.cell_weight();
}

PhaseScreen::PhaseScreen(SamplingGrid g, RealMap v) : grid(g), values(std::move(v)) {
  if (values.rows() != grid.n_samples || values.cols() != grid.n_samples) {
    throw DimensionError("phase screen shape does not match its grid");
  }
}

PhaseScreen::PhaseScreen(SamplingGrid g)
    : grid(g), values(RealMap::Zero(g.n_samples, g.n_samples)) {}

PhaseScreen operator+(const PhaseScreen& a, const PhaseScreen& b) {
  if (!(a.grid == b.grid)) {
    throw DimensionError("cannot add phase screens on different grids");
  }
  return PhaseScreen(a.grid, a.values + b.values);
}

PhaseScreen operator-(const PhaseScreen& a) { return PhaseScreen(a.grid, -a.values); }

PhaseScreen operator*(double scale, const PhaseScreen& a) {
  return PhaseScreen(a.grid, scale * a.values);
}

}  // namespace aorl

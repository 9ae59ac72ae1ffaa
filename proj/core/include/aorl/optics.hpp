#pragma once

#include "aorl/field.hpp"

namespace aorl {

struct OpticalConfig {
  double wavelength = 1550e-9;
  double aperture_diameter = 0.5;
  SamplingGrid pupil{128, 1.1 * 0.5, PlaneKind::pupil};
  /// 64 samples over 16 diffraction widths: 4 samples per lambda*f/D.
  SamplingGrid focal{64, 16.0, PlaneKind::focal};

  void validate() const;
};

/// Binary transmission mask: 1 where the radial distance from the optical
/// axis is <= diameter/2.
ScalarField circular_aperture(const SamplingGrid& grid, double diameter);

/// amplitude * exp(i*phase), pointwise.
ScalarField apply_phase(const ScalarField& field, const PhaseScreen& phase);

RealMap power_map(const ScalarField& field);

/// Focal grid whose sampling makes the discrete transform unitary: same sample
/// count as the pupil and spacing D/(n*dx) diffraction widths. Power is then
/// conserved exactly; on coarser focal windows only the captured part is.
SamplingGrid complete_focal_grid(const SamplingGrid& pupil, double aperture_diameter);

/// Fraunhofer propagation by matrix Fourier transform with explicit focal
/// scaling. The kernel matrix is built once, so keep one instance per
/// (pupil grid, focal grid, D) and reuse it; the object is immutable and may be
/// shared between threads.
class FocalPropagator {
 public:
  FocalPropagator(const SamplingGrid& pupil, const SamplingGrid& focal, double aperture_diameter);

  [[nodiscard]] ScalarField propagate(const ScalarField& pupil_field) const;

  /// On-axis focal amplitude only; equals propagate(f).amplitude at the
  /// focal center but costs a single sum.
  [[nodiscard]] Complex on_axis(const ScalarField& pupil_field) const;

  [[nodiscard]] const SamplingGrid& pupil() const { return pupil_; }
  [[nodiscard]] const SamplingGrid& focal() const { return focal_; }

 private:
  SamplingGrid pupil_;
  SamplingGrid focal_;
  double diameter_;
  ComplexMap kernel_;  // focal samples x pupil samples, shared by both axes
};

/// Convenience wrapper that builds a FocalPropagator from the config. Rejects
/// non-finite input with InputError.
ScalarField propagate_to_focus(const ScalarField& pupil_field, const OpticalConfig& config);

}  // namespace aorl

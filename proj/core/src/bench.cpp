#include "aorl/bench.hpp"

#include <cmath>

namespace aorl {

OpticalBench::OpticalBench(const OpticalConfig& config, double detector_window_widths)
    : config_((config.validate(), config)),
      window_widths_(detector_window_widths),
      aperture_(circular_aperture(config.pupil, config.aperture_diameter)),
      mask_(aperture_.amplitude.real()),
      propagator_(config.pupil, config.focal, config.aperture_diameter) {
  if (!(window_widths_ > 0.0)) throw ConfigError("detector window must be positive");
  const RealMap ideal = power_map(propagator_.propagate(aperture_));
  reference_total_ = ideal.sum() * config_.focal.cell_weight();
  ideal_peak_ = ideal(config_.focal.center(), config_.focal.center());
  reference_observation_ =
      quadrant_observation(ideal, config_.focal, reference_total_, window_widths_);
}

BenchReading OpticalBench::measure(const PhaseScreen& residual) const {
  BenchReading out;
  const ScalarField pupil = apply_phase(aperture_, residual);
  out.focal_power = power_map(propagator_.propagate(pupil));
  out.observation =
      quadrant_observation(out.focal_power, config_.focal, reference_total_, window_widths_);
  out.strehl_direct = strehl_direct(out.focal_power, ideal_peak_).value;
  out.strehl_mahajan = strehl_mahajan(residual, aperture_).value;
  out.residual_rms = std::sqrt(-std::log(out.strehl_mahajan));
  return out;
}

}  // namespace aorl

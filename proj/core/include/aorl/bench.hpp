#pragma once

#include "aorl/optics.hpp"
#include "aorl/sensing.hpp"

namespace aorl {

enum class RewardKind {
  direct,   // on-axis PSF sample over the ideal peak
  mahajan,  // exp(-sigma^2) of the residual phase
};

/// Everything measured for one residual phase.
struct BenchReading {
  RealMap focal_power;
  QuadrantObservation observation;
  double strehl_direct = 1.0;
  double strehl_mahajan = 1.0;
  double residual_rms = 0.0;  // piston-removed, over the aperture [rad]

  [[nodiscard]] double strehl(RewardKind kind) const {
    return kind == RewardKind::direct ? strehl_direct : strehl_mahajan;
  }
};

/// The fixed optical train shared by the environment and the Shack-Hartmann
/// baseline: aperture, focal propagator and the unaberrated run constants
/// (total focal power and on-axis peak). Immutable after construction.
class OpticalBench {
 public:
  explicit OpticalBench(const OpticalConfig& config, double detector_window_widths = 8.0);

  [[nodiscard]] const OpticalConfig& config() const { return config_; }
  [[nodiscard]] const ScalarField& aperture() const { return aperture_; }
  [[nodiscard]] const RealMap& aperture_mask() const { return mask_; }
  [[nodiscard]] const FocalPropagator& propagator() const { return propagator_; }
  [[nodiscard]] double reference_total() const { return reference_total_; }
  [[nodiscard]] double ideal_peak() const { return ideal_peak_; }
  [[nodiscard]] const QuadrantObservation& reference_observation() const {
    return reference_observation_;
  }

  [[nodiscard]] BenchReading measure(const PhaseScreen& residual) const;

 private:
  OpticalConfig config_;
  double window_widths_;
  ScalarField aperture_;
  RealMap mask_;
  FocalPropagator propagator_;
  double reference_total_ = 0.0;
  double ideal_peak_ = 0.0;
  QuadrantObservation reference_observation_;
};

}  // namespace aorl

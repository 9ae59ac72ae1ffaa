#pragma once

#include <Eigen/Core>

#include "aorl/field.hpp"

namespace aorl {

enum class InfluenceModel {
  gaussian_facesheet,  // continuous surface, unit-peak Gaussian per actuator
  piston_segments,     // flat square segment per actuator
};

struct DMConfig {
  int n_across = 8;
  double pitch = 0.5 / 8;
  double stroke_limit = 1e-6;        // surface meters per normalized unit
  double influence_sigma = 0.55 * 0.5 / 8;
  InfluenceModel model = InfluenceModel::gaussian_facesheet;

  [[nodiscard]] int n_actuators() const { return n_across * n_across; }
  void validate() const;

  /// Actuator grid spanning the aperture: pitch D/n_across, sigma 0.55 pitch.
  static DMConfig for_aperture(double aperture_diameter, int n_across = 8);
};

/// Normalized actuator positions in [-1, 1]. Index j = row * n_across + col,
/// row 0 at the top (most negative y).
struct ActuatorCommand {
  Eigen::VectorXd values;

  static ActuatorCommand zero(int n) { return {Eigen::VectorXd::Zero(n)}; }
  [[nodiscard]] Eigen::Index size() const { return values.size(); }
};

struct ClampResult {
  ActuatorCommand command;
  bool had_nan = false;
};

/// Elementwise clamp to [-1, 1]. NaN entries become 0 and set had_nan.
ClampResult clamp_command(const Eigen::Ref<const Eigen::VectorXd>& raw);

/// Phi = 2 * (2 pi / lambda) * surface; the factor 2 accounts for reflection.
PhaseScreen phase_from_surface(const SamplingGrid& grid, const RealMap& surface,
                               double wavelength);

/// Influence functions sampled once on a pupil grid. Immutable after
/// construction; surface evaluation is a single matrix-vector product.
class DeformableMirror {
 public:
  DeformableMirror(const DMConfig& cfg, const SamplingGrid& grid);

  [[nodiscard]] const DMConfig& config() const { return cfg_; }
  [[nodiscard]] const SamplingGrid& grid() const { return grid_; }

  /// Actuator center coordinates (x, y) in meters.
  [[nodiscard]] Eigen::Vector2d actuator_position(int index) const;

  /// surface(x) = sum_j cmd_j * stroke_limit * G_j(x), in meters.
  [[nodiscard]] RealMap surface(const ActuatorCommand& cmd) const;
  [[nodiscard]] PhaseScreen phase(const ActuatorCommand& cmd, double wavelength) const;

  /// Phase per unit command for every actuator: (pixels x actuators), row-major
  /// pixel order.
  [[nodiscard]] Eigen::MatrixXd phase_influence(double wavelength) const;

  /// Least-squares fit of the DM phase to `target` over the masked pixels,
  /// piston excluded, solved by normal equations and then clamped. With
  /// target = -aberration this is the fitting-error ceiling of the mirror.
  [[nodiscard]] ActuatorCommand project_phase(const PhaseScreen& target, const RealMap& mask,
                                              double wavelength) const;

 private:
  DMConfig cfg_;
  SamplingGrid grid_;
  Eigen::MatrixXd influence_;  // pixels x actuators, unit peak, dimensionless
};

/// Largest |surface| / stroke_limit over every single-signed selection of at
/// most `max_active` actuators inside each 3x3 actuator neighborhood.
/// Exhaustive; used to freeze the stroke-bound regression constant.
double neighborhood_stroke_bound(const DeformableMirror& dm, int max_active);

}  // namespace aorl

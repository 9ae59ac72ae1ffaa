#pragma once

#include <filesystem>
#include <vector>

#include "aorl/bench.hpp"
#include "aorl/deformable_mirror.hpp"

namespace aorl {

struct LensletConfig {
  int n_across = 12;
  /// Minimum fraction of a subaperture's samples inside the pupil for the
  /// lenslet to be used. 1.0 keeps fully illuminated lenslets only.
  double min_illumination = 1.0;

  void validate() const;
};

/// Mean phase gradients per active lenslet [rad/m]: all x-slopes in lenslet
/// order, then all y-slopes.
struct SlopeVector {
  Eigen::VectorXd values;
};

/// Square lenslet grid of side D/n_across laid over the pupil, with the
/// active set and per-lenslet sample lists precomputed.
class LensletArray {
 public:
  LensletArray(const LensletConfig& cfg, const SamplingGrid& grid, double aperture_diameter);

  [[nodiscard]] const LensletConfig& config() const { return cfg_; }
  [[nodiscard]] int active_count() const { return static_cast<int>(x_samples_.size()); }
  [[nodiscard]] int slope_count() const { return 2 * active_count(); }
  /// Lenslet centers (x, y) in meters for the active lenslets, in slope order.
  [[nodiscard]] const std::vector<Eigen::Vector2d>& centers() const { return centers_; }
  /// Active flag for each of the n_across^2 lenslets, row-major.
  [[nodiscard]] const std::vector<bool>& active_mask() const { return active_; }

  /// Idealized noiseless sensor: per active lenslet, the mean central
  /// finite-difference gradient over samples whose difference stencil lies
  /// inside the pupil.
  [[nodiscard]] SlopeVector measure(const PhaseScreen& residual) const;

 private:
  LensletConfig cfg_;
  SamplingGrid grid_;
  std::vector<bool> active_;
  std::vector<Eigen::Vector2d> centers_;
  std::vector<std::vector<int>> x_samples_;  // flat indices with valid x stencil
  std::vector<std::vector<int>> y_samples_;
};

SlopeVector measure_slopes(const PhaseScreen& residual, const LensletArray& lenslets);

struct CalibrationOptions {
  double poke = 0.05;                       // normalized command units
  double relative_regularization = 1e-3;    // times the largest singular value
};

struct Reconstructor {
  Eigen::MatrixXd interaction;  // slopes x actuators, response per unit command
  Eigen::MatrixXd control;      // actuators x slopes
  Eigen::VectorXd singular_values;
  double regularization = 0.0;  // absolute Tikhonov parameter
};

/// Pokes each actuator by +poke, records slopes/poke, and forms the Tikhonov
/// regularized pseudo-inverse V diag(s / (s^2 + lambda^2)) U^T.
Reconstructor calibrate(const DeformableMirror& dm, const LensletArray& lenslets,
                        double wavelength, const CalibrationOptions& options = {});

/// CSV export, row = slope index, column = actuator index (the control matrix
/// is written transposed so both files share that layout).
void write_reconstructor_csv(const Reconstructor& rec, const std::filesystem::path& dir);

struct LoopIteration {
  ActuatorCommand command;
  StrehlValue strehl;           // per the loop's reward kind
  double strehl_direct = 0.0;
  double strehl_mahajan = 0.0;
};

/// Integrator loop u <- clamp(u - gain * C * slopes(phi_ab + phi_dm(u))).
/// Holds references; the dm, lenslets, reconstructor and bench must outlive it.
class ShackHartmannLoop {
 public:
  ShackHartmannLoop(const DeformableMirror& dm, const LensletArray& lenslets,
                    const Reconstructor& reconstructor, const OpticalBench& bench,
                    RewardKind reward = RewardKind::direct);

  [[nodiscard]] std::vector<LoopIteration> run(const PhaseScreen& screen, double gain,
                                               int n_iter) const;

 private:
  const DeformableMirror& dm_;
  const LensletArray& lenslets_;
  const Reconstructor& reconstructor_;
  const OpticalBench& bench_;
  RewardKind reward_;
};

}  // namespace aorl

#include "aorl/deformable_mirror.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>
#include <numbers>

#include <Eigen/Cholesky>

namespace aorl {

void DMConfig::validate() const {
  if (n_across < 1) throw ConfigError("DM needs at least one actuator per side");
  if (!(pitch > 0.0)) throw ConfigError("actuator pitch must be positive");
  if (!(stroke_limit > 0.0)) throw ConfigError("stroke limit must be positive");
  if (model == InfluenceModel::gaussian_facesheet && !(influence_sigma > 0.0)) {
    throw ConfigError("influence sigma must be positive");
  }
}

DMConfig DMConfig::for_aperture(double aperture_diameter, int n_across) {
  DMConfig c;
  c.n_across = n_across;
  c.pitch = aperture_diameter / n_across;
  c.influence_sigma = 0.55 * c.pitch;
  return c;
}

ClampResult clamp_command(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  ClampResult out{ActuatorCommand{Eigen::VectorXd(raw.size())}, false};
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (std::isnan(v)) {
      out.command.values[i] = 0.0;
      out.had_nan = true;
    } else {
      out.command.values[i] = std::clamp(v, -1.0, 1.0);
    }
  }
  return out;
}

PhaseScreen phase_from_surface(const SamplingGrid& grid, const RealMap& surface,
                               double wavelength) {
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  return PhaseScreen(grid, surface * (4.0 * std::numbers::pi / wavelength));
}

DeformableMirror::DeformableMirror(const DMConfig& cfg, const SamplingGrid& grid)
    : cfg_(cfg), grid_(grid) {
  cfg_.validate();
  grid_.validate();
  if (grid_.plane != PlaneKind::pupil) throw DimensionError("DM lives on the pupil grid");
  const int n = grid_.n_samples;
  const int na = cfg_.n_actuators();
  influence_.resize(static_cast<Eigen::Index>(n) * n, na);
  for (int j = 0; j < na; ++j) {
    const Eigen::Vector2d center = actuator_position(j);
    for (int r = 0; r < n; ++r) {
      const double dy = grid_.coordinate(r) - center.y();
      for (int c = 0; c < n; ++c) {
        const double dx = grid_.coordinate(c) - center.x();
        double v = 0.0;
        if (cfg_.model == InfluenceModel::gaussian_facesheet) {
          v = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg_.influence_sigma * cfg_.influence_sigma));
        } else {
          const double half = cfg_.pitch / 2.0;
          v = (dx >= -half && dx < half && dy >= -half && dy < half) ? 1.0 : 0.0;
        }
        influence_(static_cast<Eigen::Index>(r) * n + c, j) = v;
      }
    }
  }
}

Eigen::Vector2d DeformableMirror::actuator_position(int index) const {
  const int row = index / cfg_.n_across;
  const int col = index % cfg_.n_across;
  const double offset = (cfg_.n_across - 1) / 2.0;
  return {(col - offset) * cfg_.pitch, (row - offset) * cfg_.pitch};
}

RealMap DeformableMirror::surface(const ActuatorCommand& cmd) const {
  if (cmd.size() != cfg_.n_actuators()) {
    throw DimensionError("command length does not match the actuator count");
  }
  const int n = grid_.n_samples;
  RealMap out(n, n);
  Eigen::Map<Eigen::VectorXd> flat(out.data(), out.size());
  flat.noalias() = influence_ * (cmd.values * cfg_.stroke_limit);
  return out;
}

PhaseScreen DeformableMirror::phase(const ActuatorCommand& cmd, double wavelength) const {
  return phase_from_surface(grid_, surface(cmd), wavelength);
}

Eigen::MatrixXd DeformableMirror::phase_influence(double wavelength) const {
  return influence_ * (4.0 * std::numbers::pi / wavelength * cfg_.stroke_limit);
}

ActuatorCommand DeformableMirror::project_phase(const PhaseScreen& target, const RealMap& mask,
                                                double wavelength) const {
  if (!(target.grid == grid_)) throw DimensionError("target phase is not on the DM grid");
  std::vector<Eigen::Index> pixels;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask.data()[i] != 0.0) pixels.push_back(i);
  }
  if (pixels.empty()) throw ConfigError("projection mask is empty");
  const Eigen::MatrixXd full = phase_influence(wavelength);
  const auto count = static_cast<Eigen::Index>(pixels.size());
  Eigen::MatrixXd basis(count, full.cols());
  Eigen::VectorXd rhs(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    basis.row(k) = full.row(pixels[static_cast<std::size_t>(k)]);
    rhs[k] = target.values.data()[pixels[static_cast<std::size_t>(k)]];
  }
  // Remove piston from both sides.
  basis.rowwise() -= basis.colwise().mean();
  rhs.array() -= rhs.mean();
  const Eigen::MatrixXd normal = basis.transpose() * basis;
  const Eigen::VectorXd solution = normal.ldlt().solve(basis.transpose() * rhs);
  return clamp_command(solution).command;
}

double neighborhood_stroke_bound(const DeformableMirror& dm, int max_active) {
  const int na = dm.config().n_actuators();
  const int side = dm.config().n_across;
  double bound = 0.0;
  for (int r0 = 0; r0 + 2 < side || (side < 3 && r0 == 0); ++r0) {
    for (int c0 = 0; c0 + 2 < side || (side < 3 && c0 == 0); ++c0) {
      std::vector<int> window;
      for (int r = r0; r < std::min(side, r0 + 3); ++r) {
        for (int c = c0; c < std::min(side, c0 + 3); ++c) window.push_back(r * side + c);
      }
      const int w = static_cast<int>(window.size());
      for (unsigned subset = 1; subset < (1u << w); ++subset) {
        if (std::popcount(subset) > max_active) continue;
        ActuatorCommand cmd = ActuatorCommand::zero(na);
        for (int k = 0; k < w; ++k) {
          if (subset & (1u << k)) cmd.values[window[static_cast<std::size_t>(k)]] = 1.0;
        }
        // By symmetry the all-negative selection has the same magnitude.
        bound = std::max(bound, dm.surface(cmd).cwiseAbs().maxCoeff() / dm.config().stroke_limit);
      }
    }
  }
  return bound;
}

}  // namespace aorl

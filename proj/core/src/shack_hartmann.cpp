#include "aorl/shack_hartmann.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "aorl/map_io.hpp"

namespace aorl {

void LensletConfig::validate() const {
  if (n_across < 2) throw ConfigError("need at least 2 lenslets across");
  if (!(min_illumination > 0.0 && min_illumination <= 1.0)) {
    throw ConfigError("lenslet illumination threshold must be in (0, 1]");
  }
}

LensletArray::LensletArray(const LensletConfig& cfg, const SamplingGrid& grid,
                           double aperture_diameter)
    : cfg_(cfg), grid_(grid) {
  cfg_.validate();
  grid_.validate();
  const int n = grid_.n_samples;
  const double radius = aperture_diameter / 2.0;
  auto inside = [&](int r, int c) {
    return r >= 0 && r < n && c >= 0 && c < n &&
           std::hypot(grid_.coordinate(c), grid_.coordinate(r)) <= radius;
  };
  const double size = aperture_diameter / cfg_.n_across;
  const double offset = (cfg_.n_across - 1) / 2.0;
  active_.assign(static_cast<std::size_t>(cfg_.n_across * cfg_.n_across), false);

  for (int lr = 0; lr < cfg_.n_across; ++lr) {
    for (int lc = 0; lc < cfg_.n_across; ++lc) {
      const double cx = (lc - offset) * size;
      const double cy = (lr - offset) * size;
      int total = 0, lit = 0;
      std::vector<int> xs, ys;
      for (int r = 0; r < n; ++r) {
        const double y = grid_.coordinate(r);
        if (y < cy - size / 2 || y >= cy + size / 2) continue;
        for (int c = 0; c < n; ++c) {
          const double x = grid_.coordinate(c);
          if (x < cx - size / 2 || x >= cx + size / 2) continue;
          ++total;
          if (!inside(r, c)) continue;
          ++lit;
          if (inside(r, c - 1) && inside(r, c + 1)) xs.push_back(r * n + c);
          if (inside(r - 1, c) && inside(r + 1, c)) ys.push_back(r * n + c);
        }
      }
      if (total == 0 || static_cast<double>(lit) < cfg_.min_illumination * total - 1e-9) continue;
      if (xs.empty() || ys.empty()) continue;
      active_[static_cast<std::size_t>(lr * cfg_.n_across + lc)] = true;
      centers_.emplace_back(cx, cy);
      x_samples_.push_back(std::move(xs));
      y_samples_.push_back(std::move(ys));
    }
  }
}

SlopeVector LensletArray::measure(const PhaseScreen& residual) const {
  if (!(residual.grid == grid_)) throw DimensionError("residual is not on the lenslet grid");
  const int n = grid_.n_samples;
  const double inv = 1.0 / (2.0 * grid_.spacing());
  const double* p = residual.values.data();
  const int count = active_count();
  SlopeVector out{Eigen::VectorXd(2 * count)};
  for (int k = 0; k < count; ++k) {
    double sx = 0.0;
    for (const int i : x_samples_[static_cast<std::size_t>(k)]) sx += p[i + 1] - p[i - 1];
    double sy = 0.0;
    for (const int i : y_samples_[static_cast<std::size_t>(k)]) sy += p[i + n] - p[i - n];
    out.values[k] = sx * inv / static_cast<double>(x_samples_[static_cast<std::size_t>(k)].size());
    out.values[count + k] =
        sy * inv / static_cast<double>(y_samples_[static_cast<std::size_t>(k)].size());
  }
  return out;
}

SlopeVector measure_slopes(const PhaseScreen& residual, const LensletArray& lenslets) {
  return lenslets.measure(residual);
}

Reconstructor calibrate(const DeformableMirror& dm, const LensletArray& lenslets,
                        double wavelength, const CalibrationOptions& options) {
  if (!(options.poke > 0.0)) throw ConfigError("calibration poke must be positive");
  if (!(options.relative_regularization >= 0.0)) {
    throw ConfigError("regularization must be non-negative");
  }
  const int na = dm.config().n_actuators();
  Reconstructor rec;
  rec.interaction.resize(lenslets.slope_count(), na);
  for (int j = 0; j < na; ++j) {
    ActuatorCommand poke = ActuatorCommand::zero(na);
    poke.values[j] = options.poke;
    rec.interaction.col(j) = lenslets.measure(dm.phase(poke, wavelength)).values / options.poke;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rec.interaction,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
  rec.singular_values = svd.singularValues();
  const double smax = rec.singular_values.size() ? rec.singular_values[0] : 0.0;
  if (!(smax > 0.0) || !std::isfinite(smax)) {
    throw CalibrationError("interaction matrix is singular");
  }
  rec.regularization = options.relative_regularization * smax;
  const double lambda2 = rec.regularization * rec.regularization;
  Eigen::VectorXd filtered(rec.singular_values.size());
  for (Eigen::Index i = 0; i < filtered.size(); ++i) {
    const double s = rec.singular_values[i];
    filtered[i] = (s * s + lambda2) > 0.0 ? s / (s * s + lambda2) : 0.0;
  }
  rec.control = svd.matrixV() * filtered.asDiagonal() * svd.matrixU().transpose();
  if (!rec.control.allFinite()) throw CalibrationError("control matrix is not finite");
  return rec;
}

void write_reconstructor_csv(const Reconstructor& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "interaction_matrix.csv", rec.interaction);
  write_matrix_csv(dir / "control_matrix.csv", rec.control.transpose());
}

ShackHartmannLoop::ShackHartmannLoop(const DeformableMirror& dm, const LensletArray& lenslets,
                                     const Reconstructor& reconstructor, const OpticalBench& bench,
                                     RewardKind reward)
    : dm_(dm), lenslets_(lenslets), reconstructor_(reconstructor), bench_(bench), reward_(reward) {}

std::vector<LoopIteration> ShackHartmannLoop::run(const PhaseScreen& screen, double gain,
                                                  int n_iter) const {
  if (!(gain > 0.0 && gain <= 1.0)) throw ConfigError("loop gain must be in (0, 1]");
  if (n_iter < 1) throw ConfigError("loop needs at least one iteration");
  const double wavelength = bench_.config().wavelength;
  ActuatorCommand u = ActuatorCommand::zero(dm_.config().n_actuators());
  std::vector<LoopIteration> trajectory;
  trajectory.reserve(static_cast<std::size_t>(n_iter));
  for (int it = 0; it < n_iter; ++it) {
    const PhaseScreen residual = screen + dm_.phase(u, wavelength);
    const SlopeVector s = lenslets_.measure(residual);
    u = clamp_command(u.values - gain * (reconstructor_.control * s.values)).command;
    const BenchReading reading = bench_.measure(screen + dm_.phase(u, wavelength));
    trajectory.push_back(
        {u, {reading.strehl(reward_)}, reading.strehl_direct, reading.strehl_mahajan});
  }
  return trajectory;
}

}  // namespace aorl

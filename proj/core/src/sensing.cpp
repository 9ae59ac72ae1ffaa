#include "aorl/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace aorl {

QuadrantObservation quadrant_observation(const RealMap& focal_power, const SamplingGrid& focal,
                                         double reference_total, double window_widths) {
  if (focal_power.rows() != focal.n_samples || focal_power.cols() != focal.n_samples) {
    throw DimensionError("focal power map does not match the focal grid");
  }
  if (!(reference_total > 0.0)) throw ConfigError("reference total power must be positive");
  const int n = focal.n_samples;
  const int center = focal.center();
  const double half = 0.5 * window_widths / focal.spacing();
  const int reach = static_cast<int>(std::floor(half + 1e-9));

  QuadrantObservation obs;
  for (int dr = -reach; dr <= reach; ++dr) {
    const int r = center + dr;
    if (r < 0 || r >= n) continue;
    // Weight toward the upper / lower half.
    const double up = dr < 0 ? 1.0 : (dr == 0 ? 0.5 : 0.0);
    const double down = 1.0 - up;
    for (int dc = -reach; dc <= reach; ++dc) {
      const int c = center + dc;
      if (c < 0 || c >= n) continue;
      const double left = dc < 0 ? 1.0 : (dc == 0 ? 0.5 : 0.0);
      const double right = 1.0 - left;
      const double p = focal_power(r, c);
      obs.q[upper_left] += up * left * p;
      obs.q[upper_right] += up * right * p;
      obs.q[lower_left] += down * left * p;
      obs.q[lower_right] += down * right * p;
    }
  }
  const double scale = focal.cell_weight() / reference_total;
  for (double& v : obs.q) v *= scale;
  return obs;
}

StrehlValue strehl_mahajan(const PhaseScreen& residual, const ScalarField& aperture) {
  if (!(residual.grid == aperture.grid)) {
    throw DimensionError("residual phase and aperture live on different grids");
  }
  const RealMap weight = aperture.amplitude.cwiseAbs2();
  const double total = weight.sum();
  if (!(total > 0.0)) throw ConfigError("aperture mask is empty");
  const double mean = residual.values.cwiseProduct(weight).sum() / total;
  const double variance =
      ((residual.values.array() - mean).square() * weight.array()).sum() / total;
  return {std::clamp(std::exp(-variance), kStrehlFloor, 1.0)};
}

StrehlValue strehl_direct(const RealMap& focal_power, double ideal_peak) {
  if (!(ideal_peak > 0.0)) throw ConfigError("ideal peak must be positive");
  const Eigen::Index c = focal_power.rows() / 2;
  return {std::clamp(focal_power(c, c) / ideal_peak, kStrehlFloor, 1.0)};
}

}  // namespace aorl

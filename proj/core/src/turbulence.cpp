#include "aorl/turbulence.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "aorl/optics.hpp"
#include "aorl/random.hpp"

namespace aorl {

void TurbulenceConfig::validate() const {
  if (!(fried_parameter > 0.0)) throw ConfigError("Fried parameter r0 must be positive");
  if (!(outer_scale > 0.0)) throw ConfigError("outer scale L0 must be positive");
  if (subharmonic_levels < 0) throw ConfigError("subharmonic levels must be >= 0");
  if (oversample < 1) throw ConfigError("screen oversampling must be >= 1");
}

TurbulenceConfig TurbulenceConfig::from_severity(double d_over_r0, double aperture_diameter,
                                                 std::uint64_t seed) {
  if (!(d_over_r0 >= 0.0)) throw ConfigError("D/r0 must be non-negative");
  TurbulenceConfig c;
  c.fried_parameter = d_over_r0 == 0.0 ? std::numeric_limits<double>::infinity()
                                       : aperture_diameter / d_over_r0;
  c.seed = seed;
  return c;
}

double phase_psd(double frequency, const TurbulenceConfig& cfg) {
  if (std::isinf(cfg.fried_parameter) || frequency == 0.0) return 0.0;
  const double inv_l0_sq =
      std::isinf(cfg.outer_scale) ? 0.0 : 1.0 / (cfg.outer_scale * cfg.outer_scale);
  const double f2 = frequency * frequency + inv_l0_sq;
  return 0.023 * std::pow(cfg.fried_parameter, -5.0 / 3.0) * std::pow(f2, -11.0 / 6.0);
}

namespace {

double fft_frequency(int index, int n, double spacing) {
  const int k = index < (n + 1) / 2 ? index : index - n;
  return k / (n * spacing);
}

void inverse_fft_2d(ComplexMap& data) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  const Eigen::Index n = data.rows();
  Eigen::VectorXcd in(n), out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    in = data.row(r).transpose();
    fft.inv(out, in);
    data.row(r) = out.transpose();
  }
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    in = data.col(c);
    fft.inv(out, in);
    data.col(c) = out;
  }
}

// Variance weight for the low-frequency cell of side `width` centred on
// (fx, fy). The PSD is steep there, so a point sample undercounts the cell;
// averaging PSD * |f|^2 over the cell and dividing by |f_c|^2 reproduces the
// cell's contribution to the structure function at separations well below
// 1/width, where it is dominated by tilt.
double cell_psd(double fx, double fy, double width, const TurbulenceConfig& cfg) {
  constexpr int q = 8;
  double sum = 0.0;
  for (int i = 0; i < q; ++i) {
    const double y = fy + ((i + 0.5) / q - 0.5) * width;
    for (int j = 0; j < q; ++j) {
      const double x = fx + ((j + 0.5) / q - 0.5) * width;
      const double f2 = x * x + y * y;
      sum += phase_psd(std::sqrt(f2), cfg) * f2;
    }
  }
  return sum / (q * q) / (fx * fx + fy * fy);
}

RealMap aperture_mask(const SamplingGrid& grid, double diameter) {
  return circular_aperture(grid, diameter).amplitude.real();
}

}  // namespace

PhaseScreen generate_screen(const SamplingGrid& grid, const TurbulenceConfig& cfg,
                            double aperture_diameter) {
  grid.validate();
  cfg.validate();
  if (grid.plane != PlaneKind::pupil) throw ConfigError("screens live on pupil grids");
  PhaseScreen screen(grid);
  if (std::isinf(cfg.fried_parameter)) return screen;

  const int n = grid.n_samples;
  const int big = n * cfg.oversample;
  const double dx = grid.spacing();
  const double df = 1.0 / (big * dx);

  RandomStream noise(cfg.seed, streams::screen_spectrum);
  ComplexMap spectrum(big, big);
  for (int r = 0; r < big; ++r) {
    const double fy = fft_frequency(r, big, dx);
    const bool low_row = r <= 1 || r == big - 1;
    for (int c = 0; c < big; ++c) {
      const double fx = fft_frequency(c, big, dx);
      const double re = noise.normal();
      const double im = noise.normal();
      const bool low = low_row && (c <= 1 || c == big - 1) && (r != 0 || c != 0);
      const double psd = low ? cell_psd(fx, fy, df, cfg) : phase_psd(std::hypot(fx, fy), cfg);
      spectrum(r, c) = Complex(re, im) * (std::sqrt(psd) * df);
    }
  }
  inverse_fft_2d(spectrum);

  const int offset = big / 2 - n / 2;
  screen.values = spectrum.block(offset, offset, n, n).real();

  RandomStream sub_noise(cfg.seed, streams::screen_subharmonics);
  for (int level = 1; level <= cfg.subharmonic_levels; ++level) {
    const double dfp = df / std::pow(3.0, level);
    for (int a = -1; a <= 1; ++a) {
      for (int b = -1; b <= 1; ++b) {
        const double re = sub_noise.normal();
        const double im = sub_noise.normal();
        if (a == 0 && b == 0) continue;
        const double fx = b * dfp;
        const double fy = a * dfp;
        const Complex coeff = Complex(re, im) * (std::sqrt(cell_psd(fx, fy, dfp, cfg)) * dfp);
        // exp(i 2 pi (fx x + fy y)) factors into a column and a row wave.
        Eigen::VectorXcd wy(n);
        Eigen::RowVectorXcd wx(n);
        for (int i = 0; i < n; ++i) {
          wy[i] = std::polar(1.0, 2.0 * std::numbers::pi * fy * grid.coordinate(i));
          wx[i] = std::polar(1.0, 2.0 * std::numbers::pi * fx * grid.coordinate(i));
        }
        screen.values += (coeff * (wy * wx)).real();
      }
    }
  }

  const RealMap mask = aperture_mask(grid, aperture_diameter);
  const double piston = (screen.values.cwiseProduct(mask)).sum() / mask.sum();
  screen.values.array() -= piston;
  return screen;
}

double realized_separation(const SamplingGrid& grid, double separation) {
  return std::round(separation / grid.spacing()) * grid.spacing();
}

std::vector<double> structure_function(std::span<const PhaseScreen> screens,
                                       std::span<const double> separations,
                                       double aperture_diameter, LagAxis axis) {
  if (screens.empty()) throw InputError("structure_function needs at least one screen");
  const SamplingGrid grid = screens.front().grid;
  for (const auto& s : screens) {
    if (!(s.grid == grid)) throw DimensionError("screens must share one grid");
  }
  const RealMap mask = aperture_mask(grid, aperture_diameter);
  const int n = grid.n_samples;
  std::vector<double> result;
  result.reserve(separations.size());
  for (const double sep : separations) {
    const int lag = static_cast<int>(std::lround(sep / grid.spacing()));
    if (lag < 1 || lag >= n) throw InputError("separation outside the sampled range");
    double sum = 0.0;
    double count = 0.0;
    auto accumulate = [&](int dr, int dc) {
      for (const auto& s : screens) {
        for (int r = 0; r + dr < n; ++r) {
          for (int c = 0; c + dc < n; ++c) {
            if (mask(r, c) == 0.0 || mask(r + dr, c + dc) == 0.0) continue;
            const double d = s.values(r + dr, c + dc) - s.values(r, c);
            sum += d * d;
            count += 1.0;
          }
        }
      }
    };
    if (axis != LagAxis::y) accumulate(0, lag);
    if (axis != LagAxis::x) accumulate(lag, 0);
    if (count == 0.0) throw InputError("no point pairs inside the aperture at this separation");
    result.push_back(sum / count);
  }
  return result;
}

double aperture_phase_variance(const PhaseScreen& screen, double aperture_diameter) {
  const RealMap mask = aperture_mask(screen.grid, aperture_diameter);
  const double n = mask.sum();
  const double mean = screen.values.cwiseProduct(mask).sum() / n;
  return ((screen.values.array() - mean).square() * mask.array()).sum() / n;
}

}  // namespace aorl

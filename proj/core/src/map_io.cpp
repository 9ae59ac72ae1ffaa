#include "aorl/map_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include <nlohmann/json.hpp>

namespace aorl {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary map I/O assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated binary map");
  return v;
}

}  // namespace

void write_binary_map(const std::filesystem::path& path, const SamplingGrid& grid,
                      const RealMap& values) {
  if (values.rows() != grid.n_samples || values.cols() != grid.n_samples) {
    throw DimensionError("map shape does not match grid");
  }
  auto out = open_out(path);
  out.write("AOPS", 4);
  put(out, static_cast<std::uint32_t>(grid.n_samples));
  put(out, grid.extent);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

PhaseScreen read_phase_screen(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AOPS", 4) != 0) throw InputError("not an AOPS map file");
  const auto n = get<std::uint32_t>(in);
  const auto extent = get<double>(in);
  SamplingGrid grid{static_cast<int>(n), extent, PlaneKind::pupil};
  grid.validate();
  RealMap values(n, n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw IoError("truncated AOPS payload");
  if (!values.allFinite()) throw InputError("AOPS payload contains non-finite values");
  return PhaseScreen(grid, std::move(values));
}

PgmScaling write_pgm(const std::filesystem::path& path, const RealMap& values,
                     const Annotations& annotations) {
  if (!values.allFinite()) throw InputError("cannot render non-finite map");
  PgmScaling scaling{values.minCoeff(), values.maxCoeff()};
  const double range = scaling.max - scaling.min;
  auto out = open_out(path);
  out << "P5\n" << values.cols() << ' ' << values.rows() << "\n65535\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double t = range > 0.0 ? (values(r, c) - scaling.min) / range : 0.0;
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
      out.write(bytes, 2);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());

  nlohmann::json side;
  side["min"] = scaling.min;
  side["max"] = scaling.max;
  side["width"] = values.cols();
  side["height"] = values.rows();
  side["scaling"] = "linear";
  for (const auto& [k, v] : annotations) side["annotations"][k] = v;
  std::ofstream js(path.string() + ".json");
  if (!js) throw IoError("cannot write sidecar for " + path.string());
  js << std::setw(2) << side << '\n';
  return scaling;
}

Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> read_pgm(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (magic != "P5" || maxval != 65535 || w <= 0 || h <= 0) {
    throw InputError("unsupported PGM header");
  }
  Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      unsigned char b[2];
      in.read(reinterpret_cast<char*>(b), 2);
      m(r, c) = static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }
  }
  if (!in) throw IoError("truncated PGM");
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace aorl

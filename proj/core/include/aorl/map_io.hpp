#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "aorl/field.hpp"

namespace aorl {

/// Flat binary map file: 16-byte header (magic "AOPS", u32 n_samples,
/// f64 extent in meters) then n*n little-endian f64 values in row-major order.
void write_binary_map(const std::filesystem::path& path, const SamplingGrid& grid,
                      const RealMap& values);
PhaseScreen read_phase_screen(const std::filesystem::path& path);

/// Extra scalar annotations stored in a PGM sidecar.
using Annotations = std::map<std::string, double>;

struct PgmScaling {
  double min = 0.0;
  double max = 0.0;
};

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples, row 0 first) with
/// linear scaling from [min, max] of the map. The scaling and any annotations
/// go to `<path>.json`.
PgmScaling write_pgm(const std::filesystem::path& path, const RealMap& values,
                     const Annotations& annotations = {});

/// Reads back the 16-bit samples of a P5 file written by write_pgm.
Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> read_pgm(
    const std::filesystem::path& path);

/// Comma-separated matrix, one row per line, full double precision.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

}  // namespace aorl

#pragma once

#include <filesystem>

#include "aorl/rl_common.hpp"

namespace aorl {

/// Writes `<stem>.json` (layout and metadata) and `<stem>.bin` (parameters,
/// then log_std, as little-endian f64). Throws IoError on failure.
void save_checkpoint(const std::filesystem::path& stem, const PolicySnapshot& snapshot,
                     Algorithm algorithm);

/// Reads a checkpoint written by save_checkpoint from `<stem>.json`/`.bin`.
/// Missing files throw InputError; malformed content throws InputError.
PolicySnapshot load_checkpoint(const std::filesystem::path& stem);

}  // namespace aorl

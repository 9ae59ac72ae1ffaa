#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace aorl {

/// Git blob object id: SHA-1 of "blob <size>\0" followed by the content,
/// as 40 lowercase hex digits.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the run directory, '/' separated
  std::string hash;
  std::uintmax_t bytes = 0;
};

/// Hashes every regular file below `root` except `exclude` (relative path),
/// sorted by path.
std::vector<ManifestEntry> hash_tree(const std::filesystem::path& root,
                                     const std::string& exclude = "manifest.json");

struct ManifestProblem {
  std::string path;
  std::string issue;  // "missing", "modified" or "unlisted"
};

/// Compares the files listed in `expected` with what is on disk.
std::vector<ManifestProblem> check_tree(const std::filesystem::path& root,
                                        const std::vector<ManifestEntry>& expected,
                                        const std::string& exclude = "manifest.json");

}  // namespace aorl

#include "aorl/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>

#include <openssl/evp.h>

#include "aorl/errors.hpp"

namespace aorl {

namespace {

std::string to_hex(const unsigned char* digest, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[digest[i] >> 4]);
    out.push_back(kDigits[digest[i] & 0xf]);
  }
  return out;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("SHA-1 digest failed");
  }
  return to_hex(digest.data(), len);
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
  return git_blob_hash(read_all(path));
}

std::vector<ManifestEntry> hash_tree(const std::filesystem::path& root, const std::string& exclude) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) throw IoError("not a directory: " + root.string());
  std::vector<ManifestEntry> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = std::filesystem::relative(entry.path(), root).generic_string();
    if (rel == exclude) continue;
    const std::string content = read_all(entry.path());
    out.push_back({rel, git_blob_hash(content), content.size()});
  }
  std::sort(out.begin(), out.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return out;
}

std::vector<ManifestProblem> check_tree(const std::filesystem::path& root,
                                        const std::vector<ManifestEntry>& expected,
                                        const std::string& exclude) {
  std::map<std::string, std::string> listed;
  for (const auto& e : expected) listed[e.path] = e.hash;
  std::vector<ManifestProblem> problems;
  for (const auto& [path, hash] : listed) {
    const auto full = root / path;
    if (!std::filesystem::is_regular_file(full)) {
      problems.push_back({path, "missing"});
    } else if (git_blob_hash_file(full) != hash) {
      problems.push_back({path, "modified"});
    }
  }
  for (const auto& e : hash_tree(root, exclude)) {
    if (!listed.contains(e.path)) problems.push_back({e.path, "unlisted"});
  }
  return problems;
}

}  // namespace aorl

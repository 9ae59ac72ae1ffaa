#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace aorl {

/// Philox4x32-10 (Salmon et al., Random123). A counter-based generator: the
/// output block is a pure function of (key, counter), so every stream is
/// reproducible on any platform.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Sequential stream over Philox blocks with a fixed layout: key = 64-bit
/// seed, counter words 2..3 = 64-bit stream id, counter words 0..1 = block
/// index. Uniforms use 53 bits from two consecutive 32-bit words; normals use
/// Box-Muller on two uniforms and cache the second variate.
///
/// Satisfies UniformRandomBitGenerator, but prefer the uniform()/normal()
/// members: std distributions are implementation-defined.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer over (a, b); used for deriving per-trial and
/// per-episode seeds from a run seed.
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b);

/// Well-known stream ids so that unrelated consumers of one seed never
/// overlap.
namespace streams {
inline constexpr std::uint64_t screen_spectrum = 1;
inline constexpr std::uint64_t screen_subharmonics = 2;
inline constexpr std::uint64_t network_init = 10;
inline constexpr std::uint64_t exploration = 11;
inline constexpr std::uint64_t replay = 12;
inline constexpr std::uint64_t warmup = 13;
}  // namespace streams

}  // namespace aorl

#pragma once

// Counter-based random number generation. Replicate streams are indexed by
// (seed, stream id), so Monte-Carlo replicates can be generated in any order
// (or in parallel) and still reproduce bit-for-bit.

#include <array>
#include <cstdint>

namespace kgof {

// One 4x32 Philox block (10 rounds).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Inverse standard-normal CDF, accurate to ~1e-15 (rational approximation
/// plus one Halley refinement step).
double inverse_normal_cdf(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Deterministic stream of uniforms/normals for one replicate.
///
/// The Philox counter is laid out as (block, block>>32, stream, stream>>32)
/// with the 64-bit seed as key, so distinct stream ids never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform draw strictly inside (0, 1); consumes 64 bits of counter output.
  double next_uniform();

  /// Standard normal via inverse-CDF of next_uniform().
  double next_normal();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int position_ = 4;  // forces refill on first draw
};

}  // namespace kgof

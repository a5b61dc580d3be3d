#pragma once

// Counter-based random streams.
//
// Every Monte Carlo path owns one stream addressed by (seed, stream id), so
// results never depend on how paths are distributed over workers. The
// generator is Philox4x32-10; normals use Box-Muller on top of it so the
// sequence is fully specified by integer arithmetic plus libm.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace klasian {

/// Philox4x32 with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// One independent stream of uniforms and standard normals.
///
/// The key is the 64-bit seed; the upper half of the counter is the stream
/// id and the lower half counts blocks. A block yields two uniforms or
/// one Box-Muller pair.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t blocks_used() const noexcept { return block_index_; }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    if (buffered_uniform_) {
      buffered_uniform_ = false;
      return spare_uniform_;
    }
    const auto words = next_block();
    spare_uniform_ = to_unit(words[2], words[3]);
    buffered_uniform_ = true;
    return to_unit(words[0], words[1]);
  }

  double normal() noexcept {
    if (buffered_normal_) {
      buffered_normal_ = false;
      return spare_normal_;
    }
    const auto words = next_block();
    const double u1 = to_unit(words[0], words[1]);
    const double u2 = to_unit(words[2], words[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    buffered_normal_ = true;
    return radius * std::cos(angle);
  }

 private:
  Philox4x32::Counter next_block() noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index_),
                                  static_cast<std::uint32_t>(block_index_ >> 32),
                                  static_cast<std::uint32_t>(stream_id_),
                                  static_cast<std::uint32_t>(stream_id_ >> 32)};
    ++block_index_;
    return Philox4x32::block(ctr, key_);
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  double spare_uniform_ = 0.0;
  double spare_normal_ = 0.0;
  bool buffered_uniform_ = false;
  bool buffered_normal_ = false;
};

/// Derive a sub-seed for an independent family of streams (e.g. one per
/// replicate in a convergence study). SplitMix64 finalizer.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace klasian

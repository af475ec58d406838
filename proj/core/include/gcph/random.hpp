#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gcph {

/// Philox4x32-10 block function (Salmon, Moraes, Dror, Shaw; SC'11).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Reproducible random stream identified by (seed, stream id).
///
/// The seed is the Philox key and the stream id occupies the upper half of
/// the counter, so two streams never share a block. Every derived variate is
/// computed here rather than through <random> distributions, whose algorithms
/// are implementation-defined.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_positive();
  double exponential(double rate);
  double normal();
  /// Uniform integer in [0, bound), bound > 0. Unbiased (Lemire).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t blocks_drawn() const { return block_index_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int position_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace gcph

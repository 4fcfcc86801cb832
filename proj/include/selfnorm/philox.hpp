#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and the
// seeded stream built on top of it.

#include <array>
#include <cstdint>
#include <limits>

namespace selfnorm {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline Philox4x32Counter philox_round(const Philox4x32Counter& ctr, const Philox4x32Key& key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo32(kM0, ctr[0], hi0, lo0);
  mulhilo32(kM1, ctr[2], hi1, lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// Ten-round Philox bijection of a 128-bit counter under a 64-bit key.
inline Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  ctr = detail::philox_round(ctr, key);
  for (int round = 1; round < 10; ++round) {
    key[0] += kW0;
    key[1] += kW1;
    ctr = detail::philox_round(ctr, key);
  }
  return ctr;
}

/// SplitMix64 finalizer; used to derive seeds, never as a stream.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// One independent random stream, addressed by (master_seed, stream_index).
///
/// Word k of the stream is a pure function of (master_seed, stream_index, k):
/// the master seed is the Philox key, the stream index fills the upper half of
/// the counter and the block number the lower half. Distinct stream indices
/// therefore never share a counter value.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions as well.
class SeededStream {
 public:
  using result_type = std::uint64_t;

  SeededStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform_closed_open() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  /// 64-bit words consumed so far.
  std::uint64_t words_drawn() const { return block_ == 0 ? 0 : block_ * 2 - 2 + lane_; }

 private:
  void refill() {
    const Philox4x32Counter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_index_),
                                static_cast<std::uint32_t>(stream_index_ >> 32)};
    const Philox4x32Key key{static_cast<std::uint32_t>(master_seed_),
                            static_cast<std::uint32_t>(master_seed_ >> 32)};
    const auto out = philox4x32_10(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
    lane_ = 0;
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
};

}  // namespace selfnorm

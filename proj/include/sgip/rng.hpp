#pragma once

// Counter-based random numbers (Philox4x32-10). A variate is a pure function
// of (seed, stream, purpose, counter), so any worker can regenerate the draws
// of any particle or bin without sequential state. This is what makes particle
// updates and per-bin resampling independent of the worker count.

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace sgip {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection.
Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key);

/// Independent consumers of randomness within one time step.
enum class RngPurpose : std::uint32_t {
  Init = 0,
  Transport = 1,
  Multinomial = 2,
  ResampleBin = 3,
  Test = 15,
};

/// Identifies one independent random sequence: (seed, stream id). The driver
/// uses the time-step index as the stream id.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// UniformRandomBitGenerator over a counter-based sequence. `block_base` lets
/// callers carve disjoint sub-sequences out of one (stream, purpose) pair; each
/// block yields two 64-bit outputs.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(RngStream stream, RngPurpose purpose, std::uint64_t block_base = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  void refill();

  Philox4x32Key key_;
  std::uint32_t purpose_bits_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Fills `out` with standard normal draws number first, first+1, ... of the
/// given stream and purpose. Draw k is the same value regardless of how the
/// range is split between calls.
void fill_normals(RngStream stream, RngPurpose purpose, std::uint64_t first, std::span<double> out);

}  // namespace sgip

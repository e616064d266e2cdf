#include "sgip/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgip {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Block counters use 60 bits; the top 4 bits of counter word 1 hold the purpose.
constexpr std::uint64_t kBlockMask = (std::uint64_t{1} << 60) - 1;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

Philox4x32Counter block_counter(RngStream stream, RngPurpose purpose, std::uint64_t block) {
  block &= kBlockMask;
  return {static_cast<std::uint32_t>(block),
          static_cast<std::uint32_t>(block >> 32) | (static_cast<std::uint32_t>(purpose) << 28),
          static_cast<std::uint32_t>(stream.stream), static_cast<std::uint32_t>(stream.stream >> 32)};
}

Philox4x32Key seed_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Box-Muller pair from one Philox block.
std::array<double, 2> normal_pair(const Philox4x32Counter& r) {
  const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
  const double u1 = 1.0 - to_unit(a);  // (0, 1]
  const double u2 = to_unit(b);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

CounterEngine::CounterEngine(RngStream stream, RngPurpose purpose, std::uint64_t block_base)
    : key_(seed_key(stream.seed)),
      purpose_bits_(static_cast<std::uint32_t>(purpose) << 28),
      stream_lo_(static_cast<std::uint32_t>(stream.stream)),
      stream_hi_(static_cast<std::uint32_t>(stream.stream >> 32)),
      block_(block_base & kBlockMask) {}

void CounterEngine::refill() {
  const Philox4x32Counter ctr{static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32) | purpose_bits_, stream_lo_, stream_hi_};
  const auto r = philox4x32(ctr, key_);
  buffer_ = {(static_cast<std::uint64_t>(r[1]) << 32) | r[0], (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
  block_ = (block_ + 1) & kBlockMask;
  available_ = 2;
}

CounterEngine::result_type CounterEngine::operator()() {
  if (available_ == 0) refill();
  return buffer_[2 - available_--];
}

double CounterEngine::uniform() { return to_unit((*this)()); }

void fill_normals(RngStream stream, RngPurpose purpose, std::uint64_t first, std::span<double> out) {
  const auto key = seed_key(stream.seed);
  std::size_t pos = 0;
  std::uint64_t draw = first;
  while (pos < out.size()) {
    const std::uint64_t block = draw / 2;
    const auto pair = normal_pair(philox4x32(block_counter(stream, purpose, block), key));
    for (std::uint64_t k = draw % 2; k < 2 && pos < out.size(); ++k, ++draw) out[pos++] = pair[k];
  }
}

}  // namespace sgip

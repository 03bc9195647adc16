#pragma once

#include <cstdint>
#include <string_view>

namespace rxt {

// SplitMix64. The state is a plain counter advanced by a fixed odd
// increment; output k is a bijective mix of seed + k * increment.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += kIncrement;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((operator()() >> 11) + 1) * 0x1.0p-53; }
  double exponential(double rate = 1.0);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  static std::uint64_t mix(std::uint64_t z);

 private:
  static constexpr std::uint64_t kIncrement = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

using Rng = SplitMix64;

// Stable 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

// Seed for replicate `index` of the experiment `tag` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace rxt

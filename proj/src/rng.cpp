#include "rxt/rng.hpp"

#include <cmath>

namespace rxt {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::exponential(double rate) { return -std::log(uniform_pos()) / rate; }

std::uint64_t SplitMix64::below(std::uint64_t n) {
  // Multiply-shift; the bias is below 2^-64 * n and irrelevant here.
  unsigned __int128 prod = static_cast<unsigned __int128>(operator()()) * n;
  return static_cast<std::uint64_t>(prod >> 64);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  std::uint64_t z = SplitMix64::mix(master + 0x9e3779b97f4a7c15ULL);
  z = SplitMix64::mix(z ^ fnv1a64(tag));
  z = SplitMix64::mix(z ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  return z;
}

}  // namespace rxt

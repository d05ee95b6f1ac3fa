#pragma once

#include <cmath>
#include <cstdint>

namespace fpg {

// SplitMix64 (Steele, Lea, Flood). Used both as the base stream and, via
// substream(), to derive independent per-trajectory / per-iteration streams,
// so results depend only on (seed, index) and never on worker count.
struct SplitMix64 {
  using result_type = std::uint64_t;
  std::uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed ^ mix64(index + 0x9e3779b97f4a7c15ULL)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Box-Muller; std::normal_distribution output is implementation-defined, so
// the deterministic tests cannot use it.
inline double normal01(SplitMix64& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.28318530717958647692 * u2);
}

// Inverse-CDF draw from a discrete distribution given as contiguous weights
// summing to ~1. Returns the last index on accumulated-rounding fallthrough.
inline int categorical(SplitMix64& g, const double* w, int n) {
  const double u = uniform01(g);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace fpg

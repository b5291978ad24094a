#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mdm {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the stream identified by (seed, a, b). Streams are independent
/// of how work is scheduled, so results do not depend on the thread count.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return Engine(stream_seed(seed, a, b));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& eng) noexcept {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Poisson variate by sequential inversion; falls back to the library
/// sampler for large means where the search gets long.
inline int poisson_inversion(Engine& eng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) return std::poisson_distribution<int>(mean)(eng);
  const double u = uniform01(eng);
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

}  // namespace mdm

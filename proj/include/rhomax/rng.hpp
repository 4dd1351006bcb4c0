#pragma once

#include <cstdint>
#include <random>

#include "rhomax/mathutil.hpp"

namespace rhomax {

// splitmix64 step; used to whiten seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random stream.  A stream is addressed by (seed, a, b); the
// address is hashed through splitmix64 into a single word that seeds a
// mt19937_64.  Both steps are fully specified, so streams are reproducible
// across platforms and independent of how work is scheduled: parallel code
// derives one stream per work item from the item's index, never from the
// executing thread.
//
// All variate transforms are explicit (no std::*_distribution, whose output
// is implementation-defined).
class RandomStream {
public:
  static RandomStream derive(std::uint64_t seed, std::uint64_t a = 0,
                             std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ull;
    h ^= splitmix64(s);
    s ^= b * 0xd1b54a32d192ed03ull;
    h ^= splitmix64(s);
    return RandomStream(h);
  }

  std::uint64_t u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); never returns an endpoint (safe for quantile maps).
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) via 128-bit multiply (no rejection loop).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Standard normal via inverse cdf.
  double normal() { return norm_quantile(uniform_open()); }

private:
  explicit RandomStream(std::uint64_t word) : gen_(word) {}
  std::mt19937_64 gen_;
};

} // namespace rhomax

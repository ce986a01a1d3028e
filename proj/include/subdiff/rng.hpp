#pragma once

#include <cstdint>
#include <random>

namespace subdiff {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent streams from (seed, key).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t key = 0) { return Rng(mix_seed(seed, key)); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace subdiff

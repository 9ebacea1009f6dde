#pragma once

#include <cstdint>
#include <random>

namespace bglr {

/// The single engine type used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  double u;
  do {
    u = std::generate_canonical<double, 53>(rng);
  } while (u <= 0.0 || u >= 1.0);
  return u;
}

/// SplitMix64 finalizer; derives well-separated child seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bglr

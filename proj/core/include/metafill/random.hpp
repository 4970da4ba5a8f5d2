#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace metafill {

using Rng = std::mt19937_64;

// splitmix64 finaliser over (seed, stream); gives independent, reproducible
// per-worker / per-item seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Draws an index with probability proportional to exp(score / temperature).
// temperature <= 1e-9 means argmax; the lowest index wins ties, so callers
// order candidates by their tie-break rule first.
std::size_t sample_softmax(std::span<const double> scores, double temperature, Rng& rng);

}  // namespace metafill

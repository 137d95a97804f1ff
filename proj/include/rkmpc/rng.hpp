#pragma once

#include <cstdint>
#include <random>

namespace rkmpc::detail {

/// splitmix64 step; used to derive decorrelated per-index streams from one seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic engine for stream `index` of master seed `seed`.
inline std::mt19937_64 stream_rng(uint64_t seed, uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (index + 1)));
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(gen);
}

}  // namespace rkmpc::detail

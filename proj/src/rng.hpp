#pragma once

#include <cstdint>
#include <random>

namespace prophetsec {

// splitmix64 finalizer; used to derive independent per-trial streams from a
// master seed so that Monte Carlo results do not depend on execution order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  return std::mt19937_64(mix64(master_seed ^ mix64(trial + 1)));
}

// Uniform in [0,1) with 53 random bits; engine-agnostic and platform-stable.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound); modulo bias is irrelevant at our bounds.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

// Parallelism cap for Monte Carlo loops, from PROPHET_THREADS (default: all cores).
int thread_cap();

}  // namespace prophetsec

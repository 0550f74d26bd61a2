#pragma once

#include <cstdint>
#include <random>

namespace edgecov {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive well-separated seeds from
// (master seed, stream index) pairs so parallel chains never share a stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double runif(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double runif(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Fresh distribution object per call: std::normal_distribution caches a spare
// deviate, and we do not want hidden state to leak between call sites.
inline double rnorm(Rng& rng, double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

// Uniform integer in [0, n).
inline int rint(Rng& rng, int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

} // namespace edgecov

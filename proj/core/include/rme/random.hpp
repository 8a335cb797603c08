// SPDX-License-Identifier: Apache-2.0
//
// Seeded randomness. Every stochastic operation takes an Rng by reference; Monte
// Carlo loops derive one child stream per iteration with child_seed() so that
// results do not depend on scheduling.

#pragma once

#include <cstdint>
#include <random>

namespace rme {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of child stream `stream` under `parent`. Distinct streams of the same
/// parent, and the same stream index under distinct parents, do not collide in
/// practice.
constexpr std::uint64_t child_seed(std::uint64_t parent, std::uint64_t stream) {
    return mix64(mix64(parent) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng child_rng(std::uint64_t parent, std::uint64_t stream) {
    return Rng(child_seed(parent, stream));
}

/// Uniform integer in [lo, hi].
template <typename Int>
Int uniform_int(Rng& rng, Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace rme

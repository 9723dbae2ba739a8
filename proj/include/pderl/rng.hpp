#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace pderl {

using Rng = std::mt19937_64;

// splitmix64 step; used to derive independent, reproducible sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministically mixes a base seed with a path of stream identifiers
// (e.g. {purpose, generation, slot}) into a new seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = base;
    std::uint64_t seed = splitmix64(state);
    for (std::uint64_t p : path) {
        state ^= p + 0x9e3779b97f4a7c15ull + (state << 6) + (state >> 2);
        seed = splitmix64(state);
    }
    return seed;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// std::normal_distribution requires stddev > 0; a zero spread is a valid
// degenerate request here (it means "no noise").
inline double gaussian(Rng& rng, double mean, double stddev) {
    if (stddev <= 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(rng);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n, double stddev) {
    Eigen::VectorXd v(n);
    if (stddev <= 0.0) {
        v.setZero();
        return v;
    }
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

}  // namespace pderl

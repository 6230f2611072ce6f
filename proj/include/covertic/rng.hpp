#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace covertic {

/// splitmix64 finalizer. Used to derive well-mixed stream seeds from a
/// (master seed, counter...) chain so that parallel workers can seed
/// independent generators without coordinating.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(splitmix64(seed) ^ a);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(mix_seed(seed, a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return splitmix64(mix_seed(seed, a, b) ^ c);
}

/// Uniform double in [0, 1) with 53 random bits. mt19937_64 output is fully
/// specified by the standard, so streams are reproducible bit-for-bit given
/// the seed.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, bound) via masked rejection.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = ~std::uint64_t{0};
    mask >>= __builtin_clzll((bound - 1) | 1);
    for (;;) {
        std::uint64_t v = rng() & mask;
        if (v < bound) return v;
    }
}

/// Standard normal pair (Box-Muller). Hand-rolled instead of
/// std::normal_distribution so that streams do not depend on the standard
/// library implementation.
inline void normal_pair(std::mt19937_64& rng, double& z0, double& z1) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    z0 = r * std::cos(two_pi * u2);
    z1 = r * std::sin(two_pi * u2);
}

}  // namespace covertic

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace asyrk {

// Deterministic RNG scheme used everywhere in this library:
// stream s of base seed b is std::mt19937_64 seeded with splitmix64(b ^ s).
// Worker thread w uses stream w, so runs are reproducible per (seed, threads).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t base_seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(base_seed ^ stream));
}

/// Uniform integer in [0, n) by rejection; avoids the implementation-defined
/// behavior of std::uniform_int_distribution so sequences are portable.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = g();
    } while (v >= limit);
    return v % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (polar rejection form).
inline double standard_normal(std::mt19937_64& g) {
    double u, v, s;
    do {
        u = 2.0 * uniform_unit(g) - 1.0;
        v = 2.0 * uniform_unit(g) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace asyrk

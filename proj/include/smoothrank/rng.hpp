#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace smoothrank {

// std::uniform_*_distribution and std::shuffle are implementation-defined,
// so everything that must be reproducible across standard libraries goes
// through these helpers on top of mt19937_64 (whose output is fixed).
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the `stream`-th independent generator derived from `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_index(Rng& gen, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = gen();
    while (x >= limit) {
        x = gen();
    }
    return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(gen);
}

template <typename T>
void shuffle(std::span<T> items, Rng& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_index(gen, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace smoothrank

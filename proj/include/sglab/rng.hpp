#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

// Deterministic, platform-independent randomness helpers.  All sampling in
// the library flows through these so that a (config, seed) pair pins every
// artifact byte-for-byte.  std::uniform_*_distribution is implementation
// defined and therefore avoided.

namespace sglab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless hash variant: mixes a seed with a counter.  Used where random
// access by index matters (e.g. Bernoulli itinerary streams).
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t s = seed + counter * 0x9e3779b97f4a7c15ULL;
    return splitmix64(s);
}

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0xa5a5a5a55a5a5a5aULL) {}

    std::uint64_t next() { return splitmix64(state); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    double real01() { return double(next() >> 11) * 0x1.0p-53; }

    // Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> shuffled_indices(std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = std::size_t(below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        return idx;
    }
};

}  // namespace sglab

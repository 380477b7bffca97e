#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mrfx {

// Deterministic draws on top of std::mt19937_64. The standard distribution
// adaptors are implementation-defined, so seeded results would not be
// portable through them.

// Uniform double in [0, 1) with 53 random bits.
inline double canonical_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), unbiased via rejection.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % n;
}

template <typename T>
void shuffle_inplace(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_uint(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace mrfx

#pragma once

#include <cstdint>
#include <random>

namespace shiftbandit {

using Rng = std::mt19937_64;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed of replication `index` under `master`. Counter based: replication i
// can be reproduced without running replications 0..i-1.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ (0xD1B54A32D192ED03ULL * (index + 1)));
}

// Uniform draw in [0,1) from the top 53 bits; unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace shiftbandit

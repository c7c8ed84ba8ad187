#pragma once
// Deterministic stream derivation. Every random stream in the toolkit is keyed
// by a tuple of integers so that results never depend on evaluation order.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lutbnn {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a seed with an ordered list of stream keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Engine(derive_seed(seed, keys));
}

// Stream domains.
inline constexpr std::uint64_t kStreamFrame = 1;
inline constexpr std::uint64_t kStreamEval = 2;
inline constexpr std::uint64_t kStreamFixedSet = 3;
inline constexpr std::uint64_t kStreamInit = 4;
inline constexpr std::uint64_t kStreamVariation = 5;

}  // namespace lutbnn

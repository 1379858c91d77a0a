#pragma once

#include <cstdint>
#include <random>

// Seed plumbing. Every stochastic routine in the library takes an explicit
// 64-bit seed; independent streams are derived from a master seed with
// splitmix64 so that results do not depend on scheduling or thread count.

namespace robdiff {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable hash of (seed, salt...) used to derive per-task substreams.
inline std::uint64_t derive_seed(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Salts>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt, Salts... rest) {
    return derive_seed(splitmix64(seed ^ (salt + 0x9e3779b97f4a7c15ULL)), rest...);
}

// The working generator. mt19937_64 seeded through splitmix64 so that
// low-entropy seeds (0, 1, 2, ...) still give well-separated streams.
inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

}  // namespace robdiff

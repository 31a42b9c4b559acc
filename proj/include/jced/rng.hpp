#pragma once

#include <cstdint>
#include <random>

namespace jced {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substream seeds so that
// per-trial streams do not depend on worker scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    return mix64(mix64(mix64(mix64(master) ^ a) ^ b) ^ c);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace jced

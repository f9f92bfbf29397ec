#pragma once

#include <cstdint>
#include <initializer_list>

namespace pla {

// pla-ctr-v1: counter-based generator. Each draw is a SplitMix64-style
// avalanche over the chained key words, so streams indexed by
// (seed, level, relation, tuple...) are order-independent.
namespace ctr_rng {

inline uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_words(std::initializer_list<uint64_t> words) {
    uint64_t h = 0x8f3c9a1b2d4e5f60ULL;
    for (uint64_t w : words) h = mix(h ^ w);
    return h;
}

// uniform in [0,1) with 53 random bits; the draw `u < c` is exact for
// rational thresholds because u is dyadic
inline double to_unit(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

inline uint64_t unit_numerator(uint64_t h) { return h >> 11; } // over 2^53

} // namespace ctr_rng

} // namespace pla

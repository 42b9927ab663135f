#pragma once

#include <cstdint>
#include <random>

namespace mgmc {

// splitmix64 finalizer, used to mix stream identifiers into seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic generator stream derived from (seed, replica, channel).
// Every sampler in the library takes an explicit generator; there is no
// global RNG state. Distinct (replica, channel) pairs give independent
// streams, so ensemble results do not depend on worker count or schedule.
inline std::mt19937_64 make_stream(std::uint64_t seed,
                                   std::uint64_t replica = 0,
                                   std::uint64_t channel = 0) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ mix64(replica + 0x51ed2701a3c5e491ULL));
    k = mix64(k ^ mix64(channel + 0xd1342543de82ef95ULL));
    return std::mt19937_64(k);
}

}  // namespace mgmc

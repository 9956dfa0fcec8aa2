#pragma once

#include <cstdint>
#include <random>

namespace kcq {

// splitmix64; used to derive independent per-shard streams from one seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream for shard `index` of a simulation seeded with `seed`. Simulations
// split work into fixed-size shards so results depend only on (seed, shard
// layout), not on the number of workers.
inline std::mt19937_64 shard_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix64(seed ^ mix64(index + 1)));
}

}  // namespace kcq

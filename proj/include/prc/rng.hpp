#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prc {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a seed path, e.g. derive_seed({base, condition, trial}).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x5157a1e5eedULL;
    for (auto p : parts) {
        h = mix64(h ^ mix64(p));
    }
    return h;
}

// Stream tags keep the sub-streams of one trial apart.
inline constexpr std::uint64_t kStreamPlant = 0x706c616e74ULL;
inline constexpr std::uint64_t kStreamCamera = 0x63616d6572ULL;
inline constexpr std::uint64_t kStreamCircuit = 0x6369726375ULL;

} // namespace prc

#pragma once

#include <cstdint>
#include <random>

namespace hby {

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Independent per-entity RNG streams. Every (seed, wafer, die, channel)
/// tuple owns its own generator, so results are reproducible regardless of
/// scheduling or worker count and channels can be enabled independently
/// without perturbing each other's draws.
enum class Stream : std::uint64_t {
    overlay = 1,
    defect = 2,
    recess = 3,
    layout = 4,
    batch = 5,
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t wafer, std::uint64_t die,
                                 Stream channel) {
    std::uint64_t h = mix64(seed ^ 0x7f4a7c15ull);
    h = mix64(h ^ wafer);
    h = mix64(h ^ (die + 0x51afd7ed558ccd6dull));
    h = mix64(h ^ static_cast<std::uint64_t>(channel));
    return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t wafer, std::uint64_t die,
                                   Stream channel) {
    return std::mt19937_64(derive_seed(seed, wafer, die, channel));
}

} // namespace hby

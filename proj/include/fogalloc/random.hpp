#pragma once

#include <cstdint>
#include <random>

namespace fogalloc {

using Engine = std::mt19937_64;

/// Purpose tags for per-replication streams. Values are part of the
/// reproducibility contract; do not renumber.
enum class StreamTag : std::uint64_t {
    arrivals = 1,
    processing_delays = 2,
    epsilon_greedy = 3,
    barrier = 4,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed for (base seed, replication, purpose). The result does
/// not depend on the order in which replications are evaluated.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replication,
                                    StreamTag tag) noexcept {
    std::uint64_t s = mix64(base_seed);
    s = mix64(s ^ mix64(replication ^ 0x632be59bd9b4e019ULL));
    return mix64(s ^ (static_cast<std::uint64_t>(tag) * 0xd1b54a32d192ed03ULL));
}

inline Engine derive_engine(std::uint64_t base_seed, std::uint64_t replication, StreamTag tag) {
    return Engine(derive_seed(base_seed, replication, tag));
}

/// Uniform variate on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Engine& engine) {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace fogalloc

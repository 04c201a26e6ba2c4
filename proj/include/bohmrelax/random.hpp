#pragma once

#include <cstdint>
#include <random>

namespace bohmrelax {

/// SplitMix64 finalizer; mixes a (seed, stream) pair into an engine seed so
/// every work item owns an independent, schedule-free generator.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// mt19937_64 stream for one work item.
inline std::mt19937_64 item_engine(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix_seed(seed, stream));
}

/// Uniform double in [0, 1) from the top 53 bits. Spelled out rather than
/// using std::uniform_real_distribution so output does not depend on the
/// standard library implementation.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace bohmrelax

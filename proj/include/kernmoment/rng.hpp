#pragma once

#include <cstdint>
#include <random>

namespace kernmoment {

// Random streams.
//
// Every random quantity is drawn from its own std::mt19937_64 engine whose
// seed is derived from the user seed and a coordinate tuple via the
// SplitMix64 finaliser:
//
//   stream_key(seed, domain, a, b) = mix(mix(mix(seed ^ domain) ^ a) ^ b)
//
// Domains name what is being drawn. The coordinates are (row, 0) for input
// x_i, (column, 0) for feature w_alpha, (trial, row) and (trial, column) for
// noise terms, (replicate, 0) for Monte-Carlo replicates, and so on. Because
// streams depend only on coordinates, results do not depend on evaluation
// order or thread count.
enum class StreamDomain : std::uint64_t {
    Inputs = 0x1,
    Features = 0x2,
    NoiseRow = 0x3,
    NoiseColumn = 0x4,
    NoiseEntry = 0x5,
    Permutation = 0x6,
    TrialSchedule = 0x7,
    Replicate = 0x8,
    FTuples = 0x9,
    Subsample = 0xA,
};

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t stream_key(std::uint64_t seed, StreamDomain domain, std::uint64_t a = 0,
                         std::uint64_t b = 0);

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
    return std::mt19937_64(stream_key(seed, domain, a, b));
}

}  // namespace kernmoment

#pragma once

#include <cstdint>

namespace nctcp {

// splitmix64 step; good enough to decorrelate seeds for independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic per-stream seed from a master seed and a stream label.
// One stream per link and one per flow keeps parameter sweeps comparable
// run to run.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
    splitmix64(s);
    return splitmix64(s);
}

// Uniform double in [0, 1) from a 64-bit draw.
inline double to_unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace nctcp

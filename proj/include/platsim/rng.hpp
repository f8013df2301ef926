#pragma once

// Counter-based deterministic random numbers. Rather than carrying mutable
// generator state through the simulation, every draw is a pure function of
// (seed, stream, counter), so trajectories are reproducible bit-for-bit no
// matter how work is split across threads, and independent streams (feed
// draws vs. behavior draws) cannot interfere.

#include <cstdint>
#include <string>

#include "core.hpp"

namespace platsim {

/// Name recorded in trajectory headers so readers can detect a generator change.
inline const char* kGeneratorName = "splitmix64-prf";

// Stream ids: one per independent randomness consumer within a trajectory.
inline constexpr std::uint64_t kStreamProposal = 0;  // which item the feed draws
inline constexpr std::uint64_t kStreamBehavior = 1;  // which behavior the user draws

namespace detail {

// One step of the splitmix64 state transition / output function.
inline std::uint64_t splitmix_next(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Pure 64-bit hash of (seed, stream, counter): three chained splitmix64
/// steps, feeding each stage's output into the next stage's state.
inline std::uint64_t prf(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t s = seed;
    std::uint64_t a = detail::splitmix_next(s);
    std::uint64_t s2 = a ^ stream;
    std::uint64_t b = detail::splitmix_next(s2);
    std::uint64_t s3 = b ^ counter;
    return detail::splitmix_next(s3);
}

/// Map 64 random bits to a double in [0, 1) using the top 53 bits.
inline double bits_to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform [0,1) draw for the given (seed, stream, counter).
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return bits_to_unit(prf(seed, stream, counter));
}

/// Sample an index from a probability vector by inverting the CDF at u.
/// The final index absorbs any rounding slack so a draw always succeeds.
inline int sample_categorical(const Vec& probs, double u) {
    double acc = 0.0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
        acc += probs[static_cast<size_t>(i)];
        if (u < acc) return i;
    }
    // u fell into the rounding slack past the last positive entry.
    for (int i = n - 1; i >= 0; --i)
        if (probs[static_cast<size_t>(i)] > 0.0) return i;
    throw NumericsError("sample_categorical: all-zero probability vector");
}

} // namespace platsim

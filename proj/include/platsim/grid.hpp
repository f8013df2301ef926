#pragma once

// Finite grids over the probability simplex. A grid of resolution k over m
// coordinates contains every belief whose entries are integer multiples of
// 1/k — the compositions of k into m nonnegative parts — which is the
// standard uniform discretization used for worst-case searches over beliefs.

#include <cstdint>
#include <vector>

#include "core.hpp"

namespace platsim {

/// Number of grid points: C(k + m - 1, m - 1). Throws if the count overflows
/// or exceeds `cap`, since callers are about to materialize the grid.
inline std::uint64_t belief_grid_size(int m, int resolution,
                                      std::uint64_t cap = 2'000'000) {
    if (m <= 0) throw ValidationError("belief grid: need at least one coordinate");
    if (resolution < 1) throw ValidationError("belief grid: resolution must be >= 1");
    // C(k + m - 1, m - 1) computed incrementally with overflow checks.
    std::uint64_t count = 1;
    for (int i = 1; i <= m - 1; ++i) {
        std::uint64_t num = static_cast<std::uint64_t>(resolution) + static_cast<std::uint64_t>(i);
        std::uint64_t next = count * num; // count * (k + i) / i, exact at each step
        if (num != 0 && next / num != count)
            throw ValidationError("belief grid: point count overflows; lower the resolution");
        count = next / static_cast<std::uint64_t>(i);
        if (count > cap)
            throw ValidationError("belief grid: " + std::to_string(count) +
                                  "+ points exceeds cap " + std::to_string(cap) +
                                  "; lower the grid resolution");
    }
    if (count > cap)
        throw ValidationError("belief grid: " + std::to_string(count) +
                              " points exceeds cap " + std::to_string(cap) +
                              "; lower the grid resolution");
    return count;
}

/// Uniform grid over the m-simplex at the given resolution. Points are
/// enumerated in a fixed lexicographic order so results are reproducible.
inline std::vector<Belief> make_belief_grid(int m, int resolution,
                                            std::uint64_t cap = 2'000'000) {
    const std::uint64_t count = belief_grid_size(m, resolution, cap);
    std::vector<Belief> grid;
    grid.reserve(static_cast<size_t>(count));

    // Enumerate compositions (c_0, ..., c_{m-1}) of `resolution` in
    // lexicographic order: start at (k, 0, ..., 0) and repeatedly move one
    // unit from the rightmost positive coordinate before the tail.
    std::vector<int> c(static_cast<size_t>(m), 0);
    c[0] = resolution;
    const double inv = 1.0 / static_cast<double>(resolution);
    while (true) {
        Vec w(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] = c[static_cast<size_t>(i)] * inv;
        grid.emplace_back(std::move(w));

        // Find the rightmost index < m-1 with a positive entry.
        int i = m - 2;
        while (i >= 0 && c[static_cast<size_t>(i)] == 0) --i;
        if (i < 0) break;
        // Move one unit right, and collect everything to the right of i+1
        // back into position i+1's tail start.
        int tail = c[static_cast<size_t>(m - 1)];
        c[static_cast<size_t>(m - 1)] = 0;
        c[static_cast<size_t>(i)] -= 1;
        c[static_cast<size_t>(i + 1)] += 1 + tail;
        // If i+1 == m-1 this re-adds the tail to the same slot, which is the
        // correct "carry" behavior; otherwise tail moves to position i+1.
    }
    return grid;
}

/// Embed a belief over a subset of models into the full model class: the
/// listed active indices receive the sub-belief's mass; all others get 0.
inline Belief embed_belief(const Belief& sub, const std::vector<int>& active, int full_size) {
    if (sub.size() != static_cast<int>(active.size()))
        throw ValidationError("embed_belief: active index count mismatch");
    Vec w(static_cast<size_t>(full_size), 0.0);
    for (size_t i = 0; i < active.size(); ++i) {
        int idx = active[i];
        if (idx < 0 || idx >= full_size) throw ValidationError("embed_belief: index out of range");
        w[static_cast<size_t>(idx)] = sub[static_cast<int>(i)];
    }
    return Belief(std::move(w));
}

} // namespace platsim

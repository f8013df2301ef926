#pragma once

// The user side of the game. A naive user plays the payoff-greedy response
// to each item. A strategic user instead picks, from a finite candidate
// family, the strategy maximizing their worst-case long-run payoff — worst
// case over the platform beliefs that remain possible once learning has
// settled, i.e. over the simplex on that candidate's own stable model set —
// net of a per-item cost for deviating from the greedy response.

#include <cstdint>
#include <optional>
#include <vector>

#include "stability.hpp"

namespace platsim {

/// Payoff-greedy user strategy: for each item, uniform over the behaviors
/// attaining the maximal user payoff (exact ties share mass equally).
inline Strategy naive_best_response(const PayoffMatrix& user_payoff) {
    Mat rows(static_cast<size_t>(user_payoff.items()),
             Vec(static_cast<size_t>(user_payoff.behaviors()), 0.0));
    for (int z = 0; z < user_payoff.items(); ++z) {
        double best = -kInf;
        for (int b = 0; b < user_payoff.behaviors(); ++b) best = std::max(best, user_payoff(z, b));
        int count = 0;
        for (int b = 0; b < user_payoff.behaviors(); ++b)
            if (user_payoff(z, b) == best) ++count;
        for (int b = 0; b < user_payoff.behaviors(); ++b)
            if (user_payoff(z, b) == best)
                rows[static_cast<size_t>(z)][static_cast<size_t>(b)] = 1.0 / count;
    }
    return Strategy(std::move(rows));
}

/// How the strategic user's candidate strategies are generated.
struct CandidateSpec {
    enum class Kind {
        AllSupportMasks, ///< greedy row on items in the mask, opt-out elsewhere
        PartitionMasks,  ///< masks chosen per item group instead of per item
        Explicit,        ///< caller-supplied strategies
        GridRefine       ///< all per-item rows from a behavior-simplex grid
    };
    Kind kind = Kind::AllSupportMasks;
    /// AllSupportMasks enumerates all 2^items masks; refuse beyond this.
    int mask_cap = 16;
    /// Behavior played on items outside the mask.
    int opt_out = 0;
    /// PartitionMasks: disjoint item groups that together cover all items.
    std::vector<std::vector<int>> groups;
    /// Explicit candidate strategies.
    std::vector<Strategy> strategies;
    /// GridRefine: resolution of the per-item behavior grid.
    int refine_resolution = 2;
    /// Cap on the total number of generated candidates.
    std::uint64_t size_guard = 1'000'000;
};

namespace detail {

inline Strategy masked_strategy(const Strategy& greedy, const std::vector<char>& in_mask,
                                int opt_out) {
    Mat rows(static_cast<size_t>(greedy.items()), Vec(static_cast<size_t>(greedy.behaviors()), 0.0));
    for (int z = 0; z < greedy.items(); ++z) {
        if (in_mask[static_cast<size_t>(z)])
            rows[static_cast<size_t>(z)] = greedy.row(z);
        else
            rows[static_cast<size_t>(z)][static_cast<size_t>(opt_out)] = 1.0;
    }
    return Strategy(std::move(rows));
}

} // namespace detail

/// Generate the candidate family for an instance, in a fixed deterministic
/// order (candidate ids are positions in the returned vector).
inline std::vector<Strategy> make_candidates(const GameInstance& g, const CandidateSpec& spec) {
    const int n = g.spaces.items, nb = g.spaces.behaviors;
    if (spec.opt_out < 0 || spec.opt_out >= nb)
        throw ValidationError("candidates: opt-out behavior index out of range");
    Strategy greedy = naive_best_response(g.user_payoff);
    std::vector<Strategy> out;

    switch (spec.kind) {
        case CandidateSpec::Kind::AllSupportMasks: {
            if (n > spec.mask_cap)
                throw ValidationError("candidates: " + std::to_string(n) +
                                      " items exceeds the support-mask cap of " +
                                      std::to_string(spec.mask_cap) +
                                      "; use partition masks or an explicit family");
            const std::uint64_t total = std::uint64_t{1} << n;
            if (total > spec.size_guard)
                throw ValidationError("candidates: family size exceeds the guard");
            out.reserve(static_cast<size_t>(total));
            for (std::uint64_t mask = 0; mask < total; ++mask) {
                std::vector<char> in(static_cast<size_t>(n), 0);
                for (int z = 0; z < n; ++z) in[static_cast<size_t>(z)] = (mask >> z) & 1u;
                out.push_back(detail::masked_strategy(greedy, in, spec.opt_out));
            }
            break;
        }
        case CandidateSpec::Kind::PartitionMasks: {
            std::vector<int> owner(static_cast<size_t>(n), -1);
            for (size_t gidx = 0; gidx < spec.groups.size(); ++gidx) {
                for (int z : spec.groups[gidx]) {
                    if (z < 0 || z >= n) throw ValidationError("candidates: group item out of range");
                    if (owner[static_cast<size_t>(z)] != -1)
                        throw ValidationError("candidates: item appears in two groups");
                    owner[static_cast<size_t>(z)] = static_cast<int>(gidx);
                }
            }
            for (int z = 0; z < n; ++z)
                if (owner[static_cast<size_t>(z)] == -1)
                    throw ValidationError("candidates: groups must cover every item");
            const int gcount = static_cast<int>(spec.groups.size());
            if (gcount > 62) throw ValidationError("candidates: too many groups");
            const std::uint64_t total = std::uint64_t{1} << gcount;
            if (total > spec.size_guard)
                throw ValidationError("candidates: family size exceeds the guard");
            for (std::uint64_t mask = 0; mask < total; ++mask) {
                std::vector<char> in(static_cast<size_t>(n), 0);
                for (int z = 0; z < n; ++z)
                    in[static_cast<size_t>(z)] = (mask >> owner[static_cast<size_t>(z)]) & 1u;
                out.push_back(detail::masked_strategy(greedy, in, spec.opt_out));
            }
            break;
        }
        case CandidateSpec::Kind::Explicit: {
            if (spec.strategies.empty())
                throw ValidationError("candidates: explicit family is empty");
            for (const auto& s : spec.strategies)
                if (s.items() != n || s.behaviors() != nb)
                    throw ValidationError("candidates: explicit strategy shape mismatch");
            out = spec.strategies;
            break;
        }
        case CandidateSpec::Kind::GridRefine: {
            if (spec.refine_resolution < 1)
                throw ValidationError("candidates: refine resolution must be >= 1");
            auto row_grid = make_belief_grid(nb, spec.refine_resolution, spec.size_guard);
            const std::uint64_t rows = row_grid.size();
            std::uint64_t total = 1;
            for (int z = 0; z < n; ++z) {
                if (total > spec.size_guard / rows)
                    throw ValidationError("candidates: family size exceeds the guard; lower "
                                          "the refine resolution");
                total *= rows;
            }
            // Odometer over per-item row choices, last item fastest.
            std::vector<size_t> pick(static_cast<size_t>(n), 0);
            for (std::uint64_t c = 0; c < total; ++c) {
                Mat m(static_cast<size_t>(n));
                for (int z = 0; z < n; ++z)
                    m[static_cast<size_t>(z)] = row_grid[pick[static_cast<size_t>(z)]].weights();
                out.emplace_back(std::move(m));
                for (int z = n - 1; z >= 0; --z) {
                    auto& p = pick[static_cast<size_t>(z)];
                    if (++p < rows) break;
                    p = 0;
                }
            }
            break;
        }
    }
    return out;
}

/// Extremal value over beliefs supported on the surviving models.
struct WorstCase {
    double value = 0.0;
    Belief arg; // attaining belief, over the full model class (zeros off the survivors)
};

enum class Extremum { Min, Max };

namespace detail {

template <typename ValueAt>
WorstCase extremum_over(const GameInstance& g, const std::vector<int>& survivors,
                        const DominanceParams& params, Extremum sense, ValueAt&& value_at) {
    if (survivors.empty()) throw ValidationError("worst case: empty survivor set");
    auto grid = make_belief_grid(static_cast<int>(survivors.size()), params.grid_resolution,
                                 params.max_grid_points);
    const double sign = sense == Extremum::Min ? 1.0 : -1.0;
    WorstCase best{kInf, Belief()};
    for (const Belief& sub : grid) {
        Belief mu = embed_belief(sub, survivors, g.models.size());
        double v = sign * value_at(mu);
        if (v < best.value) {
            best.value = v;
            best.arg = mu;
        }
    }
    best.value *= sign;
    return best;
}

} // namespace detail

/// Worst-case (or, with sense = Max, best-case) expected user payoff of
/// `user`, deviation cost included, over beliefs on `survivors`.
inline WorstCase worst_case_user_value(const GameInstance& g, const Strategy& user,
                                       const Strategy& greedy, const std::vector<int>& survivors,
                                       const DominanceParams& params = {},
                                       Extremum sense = Extremum::Min) {
    return detail::extremum_over(g, survivors, params, sense, [&](const Belief& mu) {
        return user_value(g.algorithm->propose(g.models, mu), user, greedy, g.user_payoff,
                          g.lambda);
    });
}

/// Worst-case (or best-case) expected platform payoff of `user` over beliefs
/// on `survivors`.
inline WorstCase worst_case_platform_value(const GameInstance& g, const Strategy& user,
                                           const std::vector<int>& survivors,
                                           const DominanceParams& params = {},
                                           Extremum sense = Extremum::Min) {
    return detail::extremum_over(g, survivors, params, sense, [&](const Belief& mu) {
        return platform_value(g.algorithm->propose(g.models, mu), user, g.platform_payoff);
    });
}

struct CandidateOutcome {
    int id = -1;
    double worst_user_value = 0.0;     // min over beliefs on its own stable set
    double worst_platform_value = 0.0; // same belief set, platform payoff
    double deviation_cost = 0.0;       // sum over items of tv(row, greedy row)
    std::vector<int> survivors;
};

struct SolveResult {
    int best_id = -1;
    Strategy best;
    double value = 0.0;                  // the max-min user value
    double worst_platform_value = 0.0;   // platform's worst case at the winner
    StableSetResult stable;              // stable set of the winning candidate
    Belief worst_belief;                 // belief attaining the min for the winner
    std::vector<CandidateOutcome> outcomes; // one per candidate, in id order
};

namespace detail {

// The greedy response must always be in the family (it anchors both the
// "never worse than naive" guarantee and tie-breaking); append it when the
// requested family happens to lack it.
inline std::vector<Strategy> candidates_with_greedy(const GameInstance& g,
                                                    const CandidateSpec& spec,
                                                    const Strategy& greedy) {
    std::vector<Strategy> candidates = make_candidates(g, spec);
    bool present = false;
    for (const Strategy& q : candidates)
        if (q == greedy) {
            present = true;
            break;
        }
    if (!present) candidates.push_back(greedy);
    return candidates;
}

} // namespace detail

/**
 * Strategic user's max-min problem over the candidate family. Each candidate
 * is scored by its worst-case user value over the simplex on its own stable
 * model set; ties (within 1e-12) go to the candidate with the smaller total
 * deviation from the greedy response, then to the lower id. The greedy
 * response itself is always a candidate, so the result never scores below
 * the naive user.
 */
inline SolveResult solve_strategic(const GameInstance& g, const CandidateSpec& spec = {},
                                   const DominanceParams& params = {}) {
    validate_instance(g);
    Strategy greedy = naive_best_response(g.user_payoff);
    std::vector<Strategy> candidates = detail::candidates_with_greedy(g, spec, greedy);

    SolveResult result;
    result.outcomes.reserve(candidates.size());
    double best_value = -kInf, best_dev = kInf;
    StableSetResult best_stable;
    Belief best_belief;
    double best_platform = 0.0;

    for (size_t id = 0; id < candidates.size(); ++id) {
        const Strategy& q = candidates[id];
        StableSetResult ss = stable_set(g, q, params);
        WorstCase wc = worst_case_user_value(g, q, greedy, ss.survivors, params);
        WorstCase wp = worst_case_platform_value(g, q, ss.survivors, params);
        double dev = 0.0;
        for (int z = 0; z < q.items(); ++z) dev += total_variation(q.row(z), greedy.row(z));

        result.outcomes.push_back({static_cast<int>(id), wc.value, wp.value, dev, ss.survivors});

        bool take = false;
        if (wc.value > best_value + kValueTol) {
            take = true;
        } else if (wc.value >= best_value - kValueTol && dev < best_dev - kValueTol) {
            take = true;
        }
        if (take) {
            result.best_id = static_cast<int>(id);
            best_value = wc.value;
            best_dev = dev;
            best_stable = std::move(ss);
            best_belief = wc.arg;
            best_platform = wp.value;
        }
    }

    result.best = candidates[static_cast<size_t>(result.best_id)];
    result.value = best_value;
    result.worst_platform_value = best_platform;
    result.stable = std::move(best_stable);
    result.worst_belief = std::move(best_belief);
    return result;
}

/// Which user faces the platform, and how a strategic one searches.
struct UserParams {
    enum class Mode { Naive, Strategic } mode = Mode::Strategic;
    CandidateSpec candidates; // used only in strategic mode
};

/// The strategy the configured user actually plays: the greedy response for
/// a naive user, the max-min solution for a strategic one (with the full
/// SolveResult attached in that case).
struct ResolvedUser {
    Strategy strategy;
    StableSetResult stable; // stable set of that strategy
    std::optional<SolveResult> solution;
};

inline ResolvedUser resolve_user(const GameInstance& g, const UserParams& user,
                                 const DominanceParams& params = {}) {
    ResolvedUser out;
    if (user.mode == UserParams::Mode::Naive) {
        out.strategy = naive_best_response(g.user_payoff);
        out.stable = stable_set(g, out.strategy, params);
    } else {
        SolveResult sol = solve_strategic(g, user.candidates, params);
        out.strategy = sol.best;
        out.stable = sol.stable;
        out.solution = std::move(sol);
    }
    return out;
}

/// Does the user's strategizing help or hurt the platform?
struct AlignmentCheck {
    /// Platform's worst-case limiting payoff under the strategic solution.
    double strategic_side = 0.0;
    /// Same quantity at the strategy a naive user would settle on: the
    /// argmax of worst-case user payoff over the full model simplex.
    double naive_side = 0.0;
    bool strategization_strictly_helps = false; // strategic_side > naive_side
    /// Self-check: the full-simplex max-min value is attained by the greedy
    /// response, as the naive-side construction requires.
    bool naive_argmax_matches_greedy = false;
    SolveResult strategic;
};

/**
 * Compare the platform's worst-case limiting payoff under the strategic
 * solution with the same payoff under the naive user. The naive side is
 * computed honestly — as the argmax over candidates of the worst-case user
 * payoff over the *full* model simplex (no elimination), which a naive user
 * implicitly solves — and then cross-checked against the greedy response's
 * value. Requires every item's user payoff to have a unique maximizing
 * behavior; a tie makes the naive side ill-defined and raises an error.
 */
inline AlignmentCheck alignment_benefit_check(const GameInstance& g, const CandidateSpec& spec = {},
                                              const DominanceParams& params = {}) {
    for (int z = 0; z < g.user_payoff.items(); ++z) {
        double best = -kInf;
        int count = 0;
        for (int b = 0; b < g.user_payoff.behaviors(); ++b) {
            if (g.user_payoff(z, b) > best) {
                best = g.user_payoff(z, b);
                count = 1;
            } else if (g.user_payoff(z, b) == best) {
                ++count;
            }
        }
        if (count != 1)
            throw ValidationError("alignment check: user payoff has tied maximizers on item " +
                                  std::to_string(z));
    }

    AlignmentCheck out;
    out.strategic = solve_strategic(g, spec, params);
    out.strategic_side = out.strategic.worst_platform_value;

    Strategy greedy = naive_best_response(g.user_payoff);
    std::vector<int> all(static_cast<size_t>(g.models.size()));
    for (int i = 0; i < g.models.size(); ++i) all[static_cast<size_t>(i)] = i;

    // Naive-side argmax over the full simplex, same tie-breaking as the
    // strategic solver (value, then deviation, then id).
    std::vector<Strategy> candidates = detail::candidates_with_greedy(g, spec, greedy);
    int naive_id = -1;
    double best_value = -kInf, best_dev = kInf;
    for (size_t id = 0; id < candidates.size(); ++id) {
        double v = worst_case_user_value(g, candidates[id], greedy, all, params).value;
        double dev = 0.0;
        for (int z = 0; z < candidates[id].items(); ++z)
            dev += total_variation(candidates[id].row(z), greedy.row(z));
        if (v > best_value + kValueTol ||
            (v >= best_value - kValueTol && dev < best_dev - kValueTol)) {
            naive_id = static_cast<int>(id);
            best_value = v;
            best_dev = dev;
        }
    }
    const Strategy& naive_choice = candidates[static_cast<size_t>(naive_id)];
    double greedy_value = worst_case_user_value(g, greedy, greedy, all, params).value;
    out.naive_argmax_matches_greedy = std::abs(best_value - greedy_value) <= 1e-9;

    StableSetResult naive_stable = stable_set(g, naive_choice, params);
    out.naive_side = worst_case_platform_value(g, naive_choice, naive_stable.survivors, params).value;
    out.strategization_strictly_helps = out.strategic_side > out.naive_side;
    return out;
}

} // namespace platsim

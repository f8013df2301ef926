#pragma once

// Which models can the platform's learning ever settle on? A model is
// eliminated when some single competitor explains the user's behavior
// strictly better — a positive expected log-likelihood-ratio gap — at every
// belief the platform could hold over the models still in play. Iterating
// simultaneous elimination to a fixed point yields the stable model set; the
// platform's belief can only concentrate on survivors.

#include <cmath>
#include <cstdint>
#include <vector>

#include "grid.hpp"
#include "instance.hpp"

namespace platsim {

struct DominanceParams {
    /// Resolution of the belief grid used to certify "at every belief".
    int grid_resolution = 8;
    /// A model must win by strictly more than this at every grid belief.
    double margin_tolerance = 1e-9;
    /// Safety cap on materialized grid size.
    std::uint64_t max_grid_points = 2'000'000;
    /// Elimination round cap; 0 means one round per model, which always
    /// suffices because a productive round strictly shrinks the active set.
    int max_rounds = 0;
};

namespace detail {

// Per-model expected negative log-likelihood of the user's behavior on each
// item ("cross-entropy row"), plus a flag marking items where the model
// assigns zero probability to a behavior the user actually plays. Gaps
// between two models reduce to feed-weighted differences of these rows.
struct CrossEntropyTable {
    Mat cost;                            // [model][item]
    std::vector<std::vector<char>> viol; // [model][item]
};

inline CrossEntropyTable make_cross_entropy_table(const ModelClass& models,
                                                  const Strategy& user) {
    const int m = models.size(), n = models.items(), nb = models.behaviors();
    CrossEntropyTable t;
    t.cost.assign(static_cast<size_t>(m), Vec(static_cast<size_t>(n), 0.0));
    t.viol.assign(static_cast<size_t>(m), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < m; ++i) {
        const Strategy& mod = models.models[static_cast<size_t>(i)];
        for (int z = 0; z < n; ++z) {
            double c = 0.0;
            bool violated = false;
            for (int b = 0; b < nb; ++b) {
                double q = user.prob(z, b);
                if (q <= 0.0) continue;
                double p = mod.prob(z, b);
                if (p <= 0.0) {
                    violated = true;
                    break;
                }
                c -= q * std::log(p);
            }
            t.cost[static_cast<size_t>(i)][static_cast<size_t>(z)] = violated ? kInf : c;
            t.viol[static_cast<size_t>(i)][static_cast<size_t>(z)] = violated ? 1 : 0;
        }
    }
    return t;
}

// Expected log-likelihood-ratio gap of `better` over `worse` under the feed,
// evaluated from precomputed cross-entropy rows. Support violations make
// individual terms infinite: if only `worse` is violated on reachable items
// the gap is +inf, if only `better` is violated it is -inf, and if both are
// violated the comparison is indeterminate and NaN is returned.
inline double gap_from_table(const CrossEntropyTable& t, int better, int worse,
                             const Vec& feed) {
    bool pos_inf = false, neg_inf = false;
    double finite = 0.0;
    const auto& cb = t.cost[static_cast<size_t>(better)];
    const auto& cw = t.cost[static_cast<size_t>(worse)];
    const auto& vb = t.viol[static_cast<size_t>(better)];
    const auto& vw = t.viol[static_cast<size_t>(worse)];
    for (size_t z = 0; z < feed.size(); ++z) {
        double r = feed[z];
        if (r <= 0.0) continue;
        bool bi = vb[z] != 0, wi = vw[z] != 0;
        if (bi && wi) return std::nan("");
        if (wi) {
            pos_inf = true;
        } else if (bi) {
            neg_inf = true;
        } else {
            finite += r * (cw[z] - cb[z]);
        }
    }
    if (pos_inf && neg_inf) return std::nan("");
    if (pos_inf) return kInf;
    if (neg_inf) return -kInf;
    return finite;
}

} // namespace detail

/**
 * Expected log-likelihood-ratio gap of model `better` over model `worse`
 * against the user's actual behavior, items drawn from `feed`:
 *
 *   E_{z ~ feed, b ~ user(.|z)} [ log better(b|z) - log worse(b|z) ].
 *
 * Equivalently the difference of joint KL divergences from the true
 * item-behavior law to each model's joint law. Positive means `better`
 * explains the observed behavior strictly better in expectation. Support
 * violations yield +inf / -inf; NaN marks an indeterminate comparison
 * (both models violated on reachable items).
 */
inline double joint_kl_gap(const Strategy& user, const Strategy& better, const Strategy& worse,
                           const Distribution& feed) {
    if (!user.same_shape(better) || !better.same_shape(worse))
        throw ValidationError("joint_kl_gap: shape mismatch");
    if (feed.size() != user.items()) throw ValidationError("joint_kl_gap: feed size mismatch");
    ModelClass pair({better, worse});
    auto table = detail::make_cross_entropy_table(pair, user);
    return detail::gap_from_table(table, 0, 1, feed.probs());
}

struct Elimination {
    int model = -1;     // the eliminated model
    int dominator = -1; // the model that certified the elimination
    double margin = 0.0;// dominator's minimum gap over the round's grid (may be +inf)
    int round = 0;      // 1-based elimination round
};

struct StableSetResult {
    std::vector<int> survivors;           // ascending indices into the model class
    std::vector<Elimination> eliminated;  // in elimination order
    int rounds = 0;                       // rounds that performed an elimination
    int grid_resolution = 0;              // the certification grid used
    double margin_tolerance = 0.0;
};

/// Certificate for a single "dominates at every belief" query.
struct DominanceCertificate {
    bool dominates = false;
    double min_margin = 0.0; // minimum gap over the grid (may be +/-inf or NaN)
    Belief argmin;           // grid belief attaining the minimum (full-class coordinates)
    /// The margin is positive everywhere but within tolerance of zero
    /// somewhere: the grid cannot certify dominance — refine to decide.
    bool inconclusive = false;
};

/**
 * Exact minimum over a belief grid on the active-model simplex of the gap of
 * `dominator` over `dominated`. Beliefs range over distributions on `active`
 * (embedded into the full class with zeros elsewhere), discretized at
 * params.grid_resolution. Returns -inf/+inf when support violations force
 * the sign, and NaN if any grid belief makes the comparison indeterminate.
 */
inline DominanceCertificate dominates(const GameInstance& g, const Strategy& user, int dominator,
                                      int dominated, const std::vector<int>& active,
                                      const DominanceParams& params = {}) {
    validate_instance(g);
    auto table = detail::make_cross_entropy_table(g.models, user);
    auto grid = make_belief_grid(static_cast<int>(active.size()), params.grid_resolution,
                                 params.max_grid_points);
    DominanceCertificate cert;
    cert.min_margin = kInf;
    bool indeterminate = false;
    for (const Belief& sub : grid) {
        Belief mu = embed_belief(sub, active, g.models.size());
        Distribution feed = g.algorithm->propose(g.models, mu);
        double gap = detail::gap_from_table(table, dominator, dominated, feed.probs());
        if (std::isnan(gap)) {
            indeterminate = true;
            cert.min_margin = gap;
            cert.argmin = mu;
            break;
        }
        if (gap < cert.min_margin) {
            cert.min_margin = gap;
            cert.argmin = mu;
        }
    }
    cert.dominates = !indeterminate && cert.min_margin > params.margin_tolerance;
    cert.inconclusive = !indeterminate && !cert.dominates && cert.min_margin > 0.0;
    return cert;
}

/// Minimum gap of `dominator` over `dominated` across the belief grid on the
/// active models; NaN if the comparison is indeterminate at some belief.
inline double min_dominance_margin(const GameInstance& g, const Strategy& user, int dominator,
                                   int dominated, const std::vector<int>& active,
                                   const DominanceParams& params = {}) {
    return dominates(g, user, dominator, dominated, active, params).min_margin;
}

/**
 * Stable model set under the given user strategy: iterated simultaneous
 * elimination of models that some single active competitor beats by more
 * than params.margin_tolerance at every grid belief over the active models.
 * A model may be eliminated in the same round as models it dominates.
 * Runs until a fixed point (at most one round per model).
 */
inline StableSetResult stable_set(const GameInstance& g, const Strategy& user,
                                  const DominanceParams& params = {}) {
    validate_instance(g);
    if (user.items() != g.spaces.items || user.behaviors() != g.spaces.behaviors)
        throw ValidationError("stable_set: user strategy shape does not match instance");

    const int m = g.models.size();
    auto table = detail::make_cross_entropy_table(g.models, user);

    std::vector<int> active(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) active[static_cast<size_t>(i)] = i;

    StableSetResult result;
    result.grid_resolution = params.grid_resolution;
    result.margin_tolerance = params.margin_tolerance;
    const int round_cap = params.max_rounds > 0 ? params.max_rounds : m;
    for (int round = 1; round <= round_cap; ++round) {
        const int a = static_cast<int>(active.size());
        if (a <= 1) break;

        auto grid = make_belief_grid(a, params.grid_resolution, params.max_grid_points);
        // One feed per grid belief, shared across all model pairs this round.
        std::vector<Vec> feeds;
        feeds.reserve(grid.size());
        for (const Belief& sub : grid)
            feeds.push_back(g.algorithm->propose(g.models, embed_belief(sub, active, m)).probs());

        std::vector<Elimination> removed_this_round;
        for (int jj = 0; jj < a; ++jj) {
            int j = active[static_cast<size_t>(jj)];
            for (int ii = 0; ii < a; ++ii) {
                if (ii == jj) continue;
                int i = active[static_cast<size_t>(ii)];
                bool wins_everywhere = true;
                double min_margin = kInf;
                for (const Vec& feed : feeds) {
                    double gap = detail::gap_from_table(table, i, j, feed);
                    // NaN (indeterminate) compares false and correctly
                    // blocks the domination claim.
                    if (!(gap > params.margin_tolerance)) {
                        wins_everywhere = false;
                        break;
                    }
                    min_margin = std::min(min_margin, gap);
                }
                if (wins_everywhere) {
                    removed_this_round.push_back({j, i, min_margin, round});
                    break;
                }
            }
        }
        if (removed_this_round.empty()) break;

        std::vector<char> gone(static_cast<size_t>(m), 0);
        for (const auto& e : removed_this_round) gone[static_cast<size_t>(e.model)] = 1;
        std::vector<int> next;
        next.reserve(active.size() - removed_this_round.size());
        for (int i : active)
            if (!gone[static_cast<size_t>(i)]) next.push_back(i);
        active = std::move(next);
        for (const auto& e : removed_this_round) result.eliminated.push_back(e);
        result.rounds = round;

        if (active.empty())
            throw NumericsError("stable_set: elimination emptied the model class, which "
                                "violates the engine's invariants");
    }

    result.survivors = active;
    return result;
}

} // namespace platsim

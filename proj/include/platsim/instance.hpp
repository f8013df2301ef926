#pragma once

// A complete game instance: spaces, payoffs for both sides, the platform's
// model class and prior, the feed algorithm, and the user's deviation-cost
// weight. Construction cross-checks every component's shape once so the rest
// of the library can index freely.

#include <memory>
#include <utility>

#include "algorithms.hpp"
#include "core.hpp"

namespace platsim {

struct GameInstance {
    Spaces spaces;
    PayoffMatrix user_payoff;
    PayoffMatrix platform_payoff;
    ModelClass models;
    Belief initial_belief;
    ProposerPtr algorithm;
    /// Weight of the user's per-item deviation cost (total variation between
    /// the played row and the payoff-greedy row).
    double lambda = 0.0;
};

inline void validate_instance(const GameInstance& g) {
    if (!g.algorithm) throw ValidationError("instance: missing feed algorithm");
    if (g.spaces.items <= 0 || g.spaces.behaviors <= 0)
        throw ValidationError("instance: empty spaces");
    auto check_payoff = [&](const PayoffMatrix& m, const char* which) {
        if (m.items() != g.spaces.items || m.behaviors() != g.spaces.behaviors)
            throw ValidationError(std::string("instance: ") + which +
                                  " payoff shape does not match spaces");
    };
    check_payoff(g.user_payoff, "user");
    check_payoff(g.platform_payoff, "platform");
    if (g.models.items() != g.spaces.items || g.models.behaviors() != g.spaces.behaviors)
        throw ValidationError("instance: model class shape does not match spaces");
    if (g.initial_belief.size() != g.models.size())
        throw ValidationError("instance: prior size does not match model class");
    if (!(g.lambda >= 0.0) || !std::isfinite(g.lambda))
        throw ValidationError("instance: deviation-cost weight must be finite and >= 0");
    // The feed must be well defined at the prior; surfacing a degenerate
    // algorithm here beats a mid-simulation throw.
    (void)g.algorithm->propose(g.models, g.initial_belief);
}

/// A non-fatal finding from instance_diagnostics.
struct Diagnostic {
    std::string kind;    // "likelihood_ratio" or "support_violation"
    int model_a = -1;    // offending model (and, for ratios, the reference model)
    int model_b = -1;
    int item = -1;
    int behavior = -1;
    double value = 0.0;  // the offending ratio (likelihood_ratio only)
    std::string message;
};

/**
 * Runtime regularity diagnostics (warnings, never errors):
 *  - model pairs whose per-observation likelihood ratio exceeds `ratio_cap`
 *    (infinite ratios included) — extreme ratios make belief updates jumpy;
 *  - if a user strategy is supplied, behaviors the user plays with positive
 *    probability that some model rules out entirely. Such a model is
 *    eliminated by a single observation, which is usually intended for the
 *    stylized classes but worth surfacing on hand-built instances.
 */
inline std::vector<Diagnostic> instance_diagnostics(const GameInstance& g,
                                                    const Strategy* user = nullptr,
                                                    double ratio_cap = 1e6) {
    std::vector<Diagnostic> out;
    const int m = g.models.size(), n = g.models.items(), nb = g.models.behaviors();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            for (int z = 0; z < n; ++z) {
                for (int b = 0; b < nb; ++b) {
                    double num = g.models.models[static_cast<size_t>(i)].prob(z, b);
                    double den = g.models.models[static_cast<size_t>(j)].prob(z, b);
                    if (num <= 0.0) continue;
                    double ratio = den > 0.0 ? num / den : kInf;
                    if (ratio > ratio_cap) {
                        out.push_back({"likelihood_ratio", i, j, z, b, ratio,
                                       "models " + g.models.names[static_cast<size_t>(i)] + "/" +
                                           g.models.names[static_cast<size_t>(j)] +
                                           " have likelihood ratio above cap at item " +
                                           std::to_string(z) + ", behavior " + std::to_string(b)});
                    }
                }
            }
        }
    }
    if (user) {
        for (int i = 0; i < m; ++i) {
            for (int z = 0; z < n; ++z) {
                for (int b = 0; b < nb; ++b) {
                    if (user->prob(z, b) > 0.0 &&
                        g.models.models[static_cast<size_t>(i)].prob(z, b) <= 0.0) {
                        out.push_back({"support_violation", i, -1, z, b, 0.0,
                                       "user plays behavior " + std::to_string(b) + " on item " +
                                           std::to_string(z) + " which model " +
                                           g.models.names[static_cast<size_t>(i)] + " rules out"});
                    }
                }
            }
        }
    }
    return out;
}

/// Expected platform payoff of feed r against user strategy q:
/// sum_z r(z) sum_b q(b|z) V(z, b).
inline double platform_value(const Distribution& feed, const Strategy& user,
                             const PayoffMatrix& platform_payoff) {
    double v = 0.0;
    for (int z = 0; z < feed.size(); ++z) {
        if (feed[z] == 0.0) continue;
        double inner = 0.0;
        for (int b = 0; b < user.behaviors(); ++b)
            inner += user.prob(z, b) * platform_payoff(z, b);
        v += feed[z] * inner;
    }
    return v;
}

/// Expected user payoff of feed r against user strategy q, including the
/// deviation cost lambda * tv(q(.|z), greedy(.|z)) charged per item shown.
inline double user_value(const Distribution& feed, const Strategy& user,
                         const Strategy& greedy, const PayoffMatrix& user_payoff,
                         double lambda) {
    double v = 0.0;
    for (int z = 0; z < feed.size(); ++z) {
        if (feed[z] == 0.0) continue;
        double inner = 0.0;
        for (int b = 0; b < user.behaviors(); ++b)
            inner += user.prob(z, b) * user_payoff(z, b);
        if (lambda > 0.0) inner -= lambda * total_variation(user.row(z), greedy.row(z));
        v += feed[z] * inner;
    }
    return v;
}

} // namespace platsim

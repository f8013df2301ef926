#pragma once

// Trustworthiness and counterfactual auditing. A platform is trustworthy at
// level kappa when (1) strategizing cannot improve the user's worst-case
// limiting payoff over playing greedily, and (2) the greedy user's worst-case
// limiting payoff is at least kappa. The counterfactual audit asks how well
// the platform can predict its own payoff under an alternative feed rule
// using only the beliefs it could have settled on under the current one —
// and compares that prediction with the truth once users re-strategize.
// Near-correctly-specified model classes (epsilon-nets) make the naive-user
// prediction provably accurate, which the predictability check certifies.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strategize.hpp"

namespace platsim {

struct TrustReport {
    double strategic_value = 0.0;     // max-min user value of the strategic solution
    double naive_value = 0.0;         // worst-case user value of the greedy response
    double strategization_gap = 0.0;  // strategic_value - naive_value
    double kappa = 0.0;               // = naive_value
    double kappa0 = 0.0;              // the level the audit was asked about
    bool trustworthy = false;         // trustworthy_at(kappa0)
    SolveResult strategic;
    StableSetResult naive_stable;

    /// Trustworthy at level k0: no gain from strategizing, and the naive
    /// guarantee reaches k0. Monotone non-increasing in k0.
    bool trustworthy_at(double k0) const { return strategization_gap <= 0.0 && kappa >= k0; }
};

inline TrustReport trust_audit(const GameInstance& g, const CandidateSpec& spec = {},
                               double kappa0 = 0.0, const DominanceParams& params = {}) {
    TrustReport report;
    report.strategic = solve_strategic(g, spec, params);
    report.strategic_value = report.strategic.value;

    Strategy greedy = naive_best_response(g.user_payoff);
    report.naive_stable = stable_set(g, greedy, params);
    report.naive_value =
        worst_case_user_value(g, greedy, greedy, report.naive_stable.survivors, params).value;

    report.strategization_gap = report.strategic_value - report.naive_value;
    report.kappa = report.naive_value;
    report.kappa0 = kappa0;
    report.trustworthy = report.trustworthy_at(kappa0);
    return report;
}

/**
 * The platform's own payoff prediction for running `p_cf` while believing
 * `mu`: the model-averaged expected payoff of the counterfactual feed,
 * E_{model ~ mu} [ platform payoff of p_cf(.;mu) against that model ].
 */
inline double predicted_payoff(const Proposer& p_cf, const Belief& mu, const ModelClass& models,
                               const PayoffMatrix& platform_payoff) {
    if (mu.size() != models.size())
        throw ValidationError("predicted_payoff: belief size does not match model class");
    Distribution feed = p_cf.propose(models, mu);
    double v = 0.0;
    for (int i = 0; i < models.size(); ++i) {
        if (mu[i] == 0.0) continue;
        v += mu[i] * platform_value(feed, models.models[static_cast<size_t>(i)], platform_payoff);
    }
    return v;
}

/// The platform's true worst-case payoff if it switched to `p_cf` and the
/// configured user re-optimized against the new rule.
inline double true_payoff_under(const GameInstance& g, const ProposerPtr& p_cf,
                                const UserParams& user, const DominanceParams& params = {}) {
    GameInstance cf = g;
    cf.algorithm = p_cf;
    ResolvedUser ru = resolve_user(cf, user, params);
    return worst_case_platform_value(cf, ru.strategy, ru.stable.survivors, params).value;
}

struct CounterfactualReport {
    double predicted = 0.0;      // best prediction over current stable-set vertices
    double true_value = 0.0;     // payoff actually realized under p_cf
    double gap = 0.0;            // |predicted - true_value|
    double algorithm_shift = 0.0; // feed distance between current rule and p_cf
    std::string beliefs_used;    // provenance of the beliefs behind `predicted`
    std::vector<int> vertices;            // current stable-set survivors
    std::vector<double> predicted_at_vertices; // prediction at each vertex
    int best_vertex = -1;        // vertex model index behind `predicted`
};

/**
 * Counterfactual audit: compare the platform's predicted payoff for `p_cf`
 * against the truth. Predictions are evaluated at every vertex of the stable
 * set induced by the current user strategy under the *current* rule (those
 * are the beliefs the platform can actually end up with); the reported
 * `predicted` is the vertex prediction closest to the truth, so `gap` is the
 * platform's best achievable prediction error.
 */
inline CounterfactualReport counterfactual_audit(const GameInstance& g, const ProposerPtr& p_cf,
                                                 const UserParams& user = {},
                                                 const DominanceParams& params = {}) {
    validate_instance(g);
    if (!p_cf) throw ValidationError("counterfactual_audit: null counterfactual rule");

    ResolvedUser current = resolve_user(g, user, params);

    CounterfactualReport report;
    report.true_value = true_payoff_under(g, p_cf, user, params);
    report.vertices = current.stable.survivors;
    report.beliefs_used =
        std::string("vertices of the stable set induced by the current ") +
        (user.mode == UserParams::Mode::Naive ? "naive" : "strategic") +
        " user under the current rule";

    double best_err = kInf;
    for (int v : report.vertices) {
        Belief vertex = Belief::vertex(g.models.size(), v);
        double pred = predicted_payoff(*p_cf, vertex, g.models, g.platform_payoff);
        report.predicted_at_vertices.push_back(pred);
        double err = std::abs(pred - report.true_value);
        if (err < best_err) {
            best_err = err;
            report.predicted = pred;
            report.best_vertex = v;
        }
    }
    report.gap = std::abs(report.predicted - report.true_value);

    auto grid = make_belief_grid(g.models.size(), params.grid_resolution, params.max_grid_points);
    report.algorithm_shift = algorithm_distance(*g.algorithm, *p_cf, g.models, grid).value;
    return report;
}

// ----------------------------------------------------------- epsilon nets

/**
 * All behavior distributions whose entries are multiples of `eps` (an
 * epsilon-net of the behavior simplex in the max norm). Requires eps in
 * (0, 1] with 1/eps an integer, so the grid meets the simplex exactly.
 */
inline std::vector<Vec> behavior_net(int behaviors, double eps) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw ValidationError("epsilon net: spacing must lie in (0, 1]");
    double steps = 1.0 / eps;
    auto rounded = static_cast<int>(std::lround(steps));
    if (rounded < 1 || std::abs(steps - rounded) > 1e-9)
        throw ValidationError("epsilon net: spacing must divide 1 exactly (got " +
                              std::to_string(eps) + ")");
    auto grid = make_belief_grid(behaviors, rounded);
    std::vector<Vec> out;
    out.reserve(grid.size());
    for (const Belief& b : grid) out.push_back(b.weights());
    return out;
}

/**
 * The epsilon-net model class: every map from items to net rows, i.e. the
 * |net|^items Cartesian product. Near-correct by construction: any true user
 * strategy has a model within eps per entry. Guarded against blowup.
 */
inline ModelClass epsilon_net_class(const Spaces& spaces, double eps,
                                    std::uint64_t size_guard = 1'000'000) {
    std::vector<Vec> net = behavior_net(spaces.behaviors, eps);
    const std::uint64_t rows = net.size();
    std::uint64_t total = 1;
    for (int z = 0; z < spaces.items; ++z) {
        if (total > size_guard / rows)
            throw ValidationError("epsilon net: class size |net|^items exceeds the guard of " +
                                  std::to_string(size_guard) + "; coarsen eps or shrink spaces");
        total *= rows;
    }
    std::vector<Strategy> models;
    models.reserve(static_cast<size_t>(total));
    std::vector<size_t> pick(static_cast<size_t>(spaces.items), 0);
    for (std::uint64_t c = 0; c < total; ++c) {
        Mat m(static_cast<size_t>(spaces.items));
        for (int z = 0; z < spaces.items; ++z) m[static_cast<size_t>(z)] = net[pick[static_cast<size_t>(z)]];
        models.emplace_back(std::move(m));
        for (int z = spaces.items - 1; z >= 0; --z) {
            auto& p = pick[static_cast<size_t>(z)];
            if (++p < rows) break;
            p = 0;
        }
    }
    return ModelClass(std::move(models));
}

/// Worst per-item KL divergence from the user's true behavior to a model.
inline double worst_item_kl(const Strategy& user, const Strategy& model) {
    if (!user.same_shape(model)) throw ValidationError("worst_item_kl: shape mismatch");
    double worst = 0.0;
    for (int z = 0; z < user.items(); ++z)
        worst = std::max(worst, kl_divergence(user.row(z), model.row(z)));
    return worst;
}

/// KL bound every stable-set survivor of an epsilon-net class satisfies:
/// log(1 / (1 - behaviors * eps)), infinite when the net is too coarse for
/// the bound to say anything.
inline double net_survivor_kl_bound(int behaviors, double eps) {
    double slack = 1.0 - behaviors * eps;
    return slack > 0.0 ? std::log(1.0 / slack) : kInf;
}

struct PredictabilityCheck {
    double bound = 0.0;         // (2L + 1) * sqrt(behaviors * eps)
    double empirical_gap = 0.0; // max prediction error over current vertices
    bool holds = false;
    LipschitzEstimate lipschitz;
    double net_epsilon = 0.0;
    double true_value = 0.0;    // greedy user's worst-case payoff under p_cf
    std::vector<int> vertices;
    std::vector<double> predicted_at_vertices;
};

/**
 * Naive-user counterfactual predictability under an epsilon-net class: the
 * platform's prediction error for `p_cf`, evaluated at every vertex of the
 * greedy user's stable set under the current rule, is bounded by
 * (2L + 1) * sqrt(behaviors * eps), with L the Lipschitz constant of the
 * counterfactual feed map. Supply L if known; otherwise it is exact 0 for
 * belief-independent rules and estimated on the vertex grid.
 */
inline PredictabilityCheck br_predictability_check(const GameInstance& g, const ProposerPtr& p_cf,
                                                   double net_eps,
                                                   std::optional<double> lipschitz = std::nullopt,
                                                   const DominanceParams& params = {}) {
    validate_instance(g);
    if (!p_cf) throw ValidationError("predictability check: null counterfactual rule");

    PredictabilityCheck check;
    check.net_epsilon = net_eps;
    if (lipschitz) {
        check.lipschitz = {*lipschitz, LipschitzEstimate::Source::Supplied, -1, -1};
    } else if (p_cf->constant_in_belief()) {
        check.lipschitz = {0.0, LipschitzEstimate::Source::Exact, -1, -1};
    } else {
        auto grid = make_belief_grid(g.models.size(), 1);
        check.lipschitz = estimate_feed_lipschitz(*p_cf, g.models, grid);
    }
    check.bound = (2.0 * check.lipschitz.value + 1.0) *
                  std::sqrt(static_cast<double>(g.spaces.behaviors) * net_eps);

    UserParams naive;
    naive.mode = UserParams::Mode::Naive;
    check.true_value = true_payoff_under(g, p_cf, naive, params);

    Strategy greedy = naive_best_response(g.user_payoff);
    StableSetResult current = stable_set(g, greedy, params);
    check.vertices = current.survivors;
    check.empirical_gap = 0.0;
    for (int v : check.vertices) {
        Belief vertex = Belief::vertex(g.models.size(), v);
        double pred = predicted_payoff(*p_cf, vertex, g.models, g.platform_payoff);
        check.predicted_at_vertices.push_back(pred);
        check.empirical_gap = std::max(check.empirical_gap, std::abs(pred - check.true_value));
    }
    check.holds = check.empirical_gap <= check.bound + kValueTol;
    return check;
}

/// Payoff family used to probe prediction gaps: U(z, b) = (V(z, b) - c)^2.
/// Its expectation under any (feed, strategy) splits exactly into the
/// payoff's variance plus the squared distance of its mean from c.
inline PayoffMatrix quadratic_payoff(const PayoffMatrix& platform_payoff, double c) {
    Mat values(static_cast<size_t>(platform_payoff.items()),
               Vec(static_cast<size_t>(platform_payoff.behaviors()), 0.0));
    double hi = 0.0;
    for (int z = 0; z < platform_payoff.items(); ++z)
        for (int b = 0; b < platform_payoff.behaviors(); ++b) {
            double d = platform_payoff(z, b) - c;
            values[static_cast<size_t>(z)][static_cast<size_t>(b)] = d * d;
            hi = std::max(hi, d * d);
        }
    // A strictly wider declared range keeps the constructor's lo < hi rule
    // satisfied even when V is constant.
    return PayoffMatrix(std::move(values), 0.0, hi + 1.0);
}

} // namespace platsim

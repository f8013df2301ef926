#pragma once

// Feed algorithms: belief-dependent rules mapping the platform's current
// belief over its model class to a distribution over items. Each rule also
// supports a multiplicative reweighting filter (used for counterfactual
// "what if we downweighted these items" audits) and can report whether it is
// constant in the belief, which makes its Lipschitz constant exactly zero.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace platsim {

/// Interface for feed algorithms.
class Proposer {
public:
    virtual ~Proposer() = default;

    virtual std::string name() const = 0;

    /// Feed distribution at belief `mu` over `models`.
    virtual Distribution propose(const ModelClass& models, const Belief& mu) const = 0;

    /**
     * Feed distribution after applying a multiplicative item filter.
     *
     * Rules defined as mixtures of scoring channels (e.g. an exploration
     * channel mixed with an engagement channel) filter and renormalize each
     * channel separately, then recombine with the original channel weights,
     * so that the mixing proportions — in particular the exploration budget —
     * survive the filter. Single-channel rules filter their output directly.
     */
    virtual Distribution propose_weighted(const ModelClass& models, const Belief& mu,
                                          const Vec& weights) const = 0;

    /// True when the feed does not depend on the belief at all, in which case
    /// its Lipschitz constant in the belief is exactly zero.
    virtual bool constant_in_belief() const { return false; }

    /// Machine-readable description (kind plus parameters) for reports.
    virtual nlohmann::json describe() const = 0;
};

using ProposerPtr = std::shared_ptr<const Proposer>;

namespace detail {

inline void check_weights(const Vec& weights, int items) {
    if (static_cast<int>(weights.size()) != items)
        throw ValidationError("reweighting: weight count " + std::to_string(weights.size()) +
                              " does not match item count " + std::to_string(items));
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw ValidationError("reweighting: weights must be finite and nonnegative");
    }
}

// Normalize v scaled by weights; the caller names the channel for errors.
inline Vec filter_and_normalize(const Vec& v, const Vec& weights, const char* channel) {
    Vec out(v.size());
    double sum = 0.0;
    for (size_t z = 0; z < v.size(); ++z) {
        out[z] = v[z] * weights[z];
        sum += out[z];
    }
    if (sum <= 0.0)
        throw NumericsError(std::string("reweighting: filter removes all mass from the ") +
                            channel + " channel");
    for (double& x : out) x /= sum;
    return out;
}

} // namespace detail

/// Belief-independent uniform feed.
class UniformProposer final : public Proposer {
public:
    std::string name() const override { return "uniform"; }

    Distribution propose(const ModelClass& models, const Belief& mu) const override {
        if (mu.size() != models.size())
            throw ValidationError("uniform feed: belief size does not match model class");
        const int n = models.items();
        return Distribution(Vec(static_cast<size_t>(n), 1.0 / n));
    }

    Distribution propose_weighted(const ModelClass& models, const Belief& mu,
                                  const Vec& weights) const override {
        const int n = models.items();
        if (mu.size() != models.size())
            throw ValidationError("uniform feed: belief size does not match model class");
        detail::check_weights(weights, n);
        Vec base(static_cast<size_t>(n), 1.0 / n);
        return Distribution(detail::filter_and_normalize(base, weights, "uniform"));
    }

    bool constant_in_belief() const override { return true; }

    nlohmann::json describe() const override { return {{"kind", "uniform"}}; }
};

/**
 * Engagement-proportional feed with uniform exploration.
 *
 * Under belief mu the expected engagement score of item z is
 * s(z) = sum_i mu_i * m_i(engage | z); the feed mixes a uniform exploration
 * channel with the engagement channel s / sum(s):
 *
 *   p(z) = explore / n + (1 - explore) * s(z) / sum(s).
 *
 * If every item's expected engagement score is zero the engagement channel
 * is undefined and the rule throws (unless explore == 1, in which case the
 * engagement channel carries no weight).
 */
class EngagementProportionalProposer final : public Proposer {
public:
    EngagementProportionalProposer(double explore, int engage_behavior)
        : explore_(explore), engage_(engage_behavior) {
        // A positive exploration share keeps every item reachable; a positive
        // engagement share keeps the rule responsive to the belief.
        if (!(explore > 0.0 && explore < 1.0))
            throw ValidationError("engagement feed: explore weight must lie strictly in (0, 1)");
        if (engage_behavior < 0)
            throw ValidationError("engagement feed: engage behavior index must be >= 0");
    }

    std::string name() const override { return "engagement_proportional"; }
    double explore() const { return explore_; }
    int engage_behavior() const { return engage_; }

    Distribution propose(const ModelClass& models, const Belief& mu) const override {
        const int n = models.items();
        Vec scores = engagement_scores(models, mu);
        Vec p(static_cast<size_t>(n), explore_ / n);
        if (explore_ < 1.0) {
            double total = 0.0;
            for (double s : scores) total += s;
            if (total <= 0.0)
                throw NumericsError("engagement feed undefined: every model assigns zero "
                                    "engagement probability under the current belief");
            for (int z = 0; z < n; ++z)
                p[static_cast<size_t>(z)] += (1.0 - explore_) * scores[static_cast<size_t>(z)] / total;
        }
        return Distribution(std::move(p));
    }

    Distribution propose_weighted(const ModelClass& models, const Belief& mu,
                                  const Vec& weights) const override {
        const int n = models.items();
        detail::check_weights(weights, n);
        Vec p(static_cast<size_t>(n), 0.0);
        if (explore_ > 0.0) {
            Vec uni(static_cast<size_t>(n), 1.0 / n);
            Vec f = detail::filter_and_normalize(uni, weights, "exploration");
            for (int z = 0; z < n; ++z) p[static_cast<size_t>(z)] += explore_ * f[static_cast<size_t>(z)];
        }
        if (explore_ < 1.0) {
            Vec scores = engagement_scores(models, mu);
            double total = 0.0;
            for (double s : scores) total += s;
            if (total <= 0.0)
                throw NumericsError("engagement feed undefined: every model assigns zero "
                                    "engagement probability under the current belief");
            Vec f = detail::filter_and_normalize(scores, weights, "engagement");
            for (int z = 0; z < n; ++z)
                p[static_cast<size_t>(z)] += (1.0 - explore_) * f[static_cast<size_t>(z)];
        }
        return Distribution(std::move(p));
    }

    nlohmann::json describe() const override {
        return {{"kind", "engagement_proportional"},
                {"explore", explore_},
                {"engage_behavior", engage_}};
    }

private:
    Vec engagement_scores(const ModelClass& models, const Belief& mu) const {
        if (mu.size() != models.size())
            throw ValidationError("engagement feed: belief size does not match model class");
        if (engage_ >= models.behaviors())
            throw ValidationError("engagement feed: engage behavior index out of range");
        const int n = models.items();
        Vec scores(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < models.size(); ++i) {
            if (mu[i] == 0.0) continue;
            for (int z = 0; z < n; ++z)
                scores[static_cast<size_t>(z)] += mu[i] * models.models[static_cast<size_t>(i)].prob(z, engage_);
        }
        return scores;
    }

    double explore_;
    int engage_;
};

/// Mixture feed with one fixed item distribution per model, mixed by the
/// belief: p = sum_i mu_i * feed_i. Each per-model feed is its own channel.
class TabularProposer final : public Proposer {
public:
    explicit TabularProposer(std::vector<Distribution> per_model_feeds)
        : feeds_(std::move(per_model_feeds)) {
        if (feeds_.empty()) throw ValidationError("tabular feed: no per-model feeds");
        for (const auto& f : feeds_)
            if (f.size() != feeds_.front().size())
                throw ValidationError("tabular feed: feeds disagree on item count");
    }

    std::string name() const override { return "tabular"; }
    const std::vector<Distribution>& feeds() const { return feeds_; }

    Distribution propose(const ModelClass& models, const Belief& mu) const override {
        check_sizes(models, mu);
        const int n = feeds_.front().size();
        Vec p(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < mu.size(); ++i)
            for (int z = 0; z < n; ++z)
                p[static_cast<size_t>(z)] += mu[i] * feeds_[static_cast<size_t>(i)][z];
        return Distribution(std::move(p));
    }

    Distribution propose_weighted(const ModelClass& models, const Belief& mu,
                                  const Vec& weights) const override {
        check_sizes(models, mu);
        const int n = feeds_.front().size();
        detail::check_weights(weights, n);
        Vec p(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < mu.size(); ++i) {
            if (mu[i] == 0.0) continue;
            Vec f = detail::filter_and_normalize(feeds_[static_cast<size_t>(i)].probs(), weights,
                                                 "per-model");
            for (int z = 0; z < n; ++z) p[static_cast<size_t>(z)] += mu[i] * f[static_cast<size_t>(z)];
        }
        return Distribution(std::move(p));
    }

    nlohmann::json describe() const override {
        nlohmann::json feeds = nlohmann::json::array();
        for (const auto& f : feeds_) feeds.push_back(f.probs());
        return {{"kind", "tabular"}, {"feeds", feeds}};
    }

private:
    void check_sizes(const ModelClass& models, const Belief& mu) const {
        if (mu.size() != models.size())
            throw ValidationError("tabular feed: belief size does not match model class");
        if (static_cast<int>(feeds_.size()) != models.size())
            throw ValidationError("tabular feed: feed count does not match model class");
        if (feeds_.front().size() != models.items())
            throw ValidationError("tabular feed: item count mismatch");
    }

    std::vector<Distribution> feeds_;
};

/// A base feed rule with a persistent multiplicative item filter attached.
/// Filters compose: reweighting an already reweighted rule multiplies the
/// weight vectors entrywise.
class ReweightedProposer final : public Proposer {
public:
    ReweightedProposer(ProposerPtr base, Vec weights)
        : base_(std::move(base)), weights_(std::move(weights)) {
        if (!base_) throw ValidationError("reweighted feed: null base rule");
        if (weights_.empty()) throw ValidationError("reweighted feed: empty weight vector");
        for (double w : weights_)
            if (!std::isfinite(w) || w <= 0.0)
                throw ValidationError("reweighted feed: weights must be finite and strictly "
                                      "positive (downweight with small values instead of zero)");
    }

    std::string name() const override { return "reweighted(" + base_->name() + ")"; }
    const Vec& weights() const { return weights_; }
    const ProposerPtr& base() const { return base_; }

    Distribution propose(const ModelClass& models, const Belief& mu) const override {
        return base_->propose_weighted(models, mu, weights_);
    }

    Distribution propose_weighted(const ModelClass& models, const Belief& mu,
                                  const Vec& extra) const override {
        detail::check_weights(extra, static_cast<int>(weights_.size()));
        Vec combined(weights_.size());
        for (size_t z = 0; z < weights_.size(); ++z) combined[z] = weights_[z] * extra[z];
        return base_->propose_weighted(models, mu, combined);
    }

    bool constant_in_belief() const override { return base_->constant_in_belief(); }

    nlohmann::json describe() const override {
        return {{"kind", "reweighted"}, {"base", base_->describe()}, {"weights", weights_}};
    }

private:
    ProposerPtr base_;
    Vec weights_;
};

// ------------------------------------------------------- feed-map analysis

/// Largest total-variation distance between two feed rules over a belief grid.
struct FeedDistance {
    double value = 0.0;
    Belief argmax;
};

inline FeedDistance algorithm_distance(const Proposer& a, const Proposer& b,
                                       const ModelClass& models,
                                       const std::vector<Belief>& grid) {
    if (grid.empty()) throw ValidationError("algorithm_distance: empty belief grid");
    FeedDistance best{-1.0, grid.front()};
    for (const Belief& mu : grid) {
        double d = total_variation(a.propose(models, mu).probs(), b.propose(models, mu).probs());
        if (d > best.value) {
            best.value = d;
            best.argmax = mu;
        }
    }
    return best;
}

/// Lipschitz constant of the belief-to-feed map, with its provenance.
struct LipschitzEstimate {
    double value = 0.0;
    enum class Source { Exact, Estimated, Supplied } source = Source::Estimated;
    int grid_a = -1, grid_b = -1; // witness pair when estimated

    static const char* source_name(Source s) {
        switch (s) {
            case Source::Exact: return "exact";
            case Source::Estimated: return "estimated";
            default: return "supplied";
        }
    }
};

/**
 * Estimate the Lipschitz constant of mu -> p(.;mu) over a belief grid.
 *
 * Belief distance is measured through the model class:
 *   d(mu, nu) = sum_{i,j} mu_i nu_j max_z tv(m_i(.|z), m_j(.|z)),
 * the expected behavioral distance between a model drawn from mu and one
 * drawn from nu. The estimate is max over grid pairs of tv(feeds)/d; pairs
 * with d ~ 0 are skipped. Belief-independent rules report exact 0.
 */
inline LipschitzEstimate estimate_feed_lipschitz(const Proposer& p, const ModelClass& models,
                                                 const std::vector<Belief>& grid) {
    if (p.constant_in_belief())
        return {0.0, LipschitzEstimate::Source::Exact, -1, -1};
    if (grid.size() < 2)
        throw ValidationError("feed Lipschitz estimate: need at least two grid beliefs");

    const int m = models.size();
    // Pairwise behavioral distance between models.
    std::vector<Vec> model_dist(static_cast<size_t>(m), Vec(static_cast<size_t>(m), 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            double worst = 0.0;
            for (int z = 0; z < models.items(); ++z)
                worst = std::max(worst, total_variation(models.models[static_cast<size_t>(i)].row(z),
                                                        models.models[static_cast<size_t>(j)].row(z)));
            model_dist[static_cast<size_t>(i)][static_cast<size_t>(j)] = worst;
            model_dist[static_cast<size_t>(j)][static_cast<size_t>(i)] = worst;
        }
    }

    std::vector<Distribution> feeds;
    feeds.reserve(grid.size());
    for (const Belief& mu : grid) feeds.push_back(p.propose(models, mu));

    LipschitzEstimate best{0.0, LipschitzEstimate::Source::Estimated, -1, -1};
    bool any_pair = false;
    for (size_t a = 0; a < grid.size(); ++a) {
        for (size_t b = a + 1; b < grid.size(); ++b) {
            double den = 0.0;
            for (int i = 0; i < m; ++i) {
                if (grid[a][i] == 0.0) continue;
                for (int j = 0; j < m; ++j)
                    den += grid[a][i] * grid[b][j] * model_dist[static_cast<size_t>(i)][static_cast<size_t>(j)];
            }
            if (den <= 1e-15) continue;
            any_pair = true;
            double ratio = total_variation(feeds[a].probs(), feeds[b].probs()) / den;
            if (ratio > best.value) {
                best.value = ratio;
                best.grid_a = static_cast<int>(a);
                best.grid_b = static_cast<int>(b);
            }
        }
    }
    if (!any_pair)
        throw NumericsError("feed Lipschitz estimate undefined: all models are behaviorally "
                            "identical, so every belief pair has zero distance");
    return best;
}

} // namespace platsim

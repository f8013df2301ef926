#pragma once

// Bayesian belief updates over the model class. A single observation (item
// shown, behavior taken) multiplies each model's weight by the likelihood it
// assigns to that behavior. Long runs multiply thousands of small numbers,
// so the incremental tracker works in log space with max-subtraction; models
// that hit a zero likelihood drop to exactly zero and stay there.

#include <cmath>
#include <vector>

#include "core.hpp"

namespace platsim {

/// One-step posterior: mu'(i) proportional to mu(i) * m_i(behavior | item).
/// Throws if every model with positive prior weight assigns the observation
/// probability zero (the update is undefined).
inline Belief bayes_update(const ModelClass& models, const Belief& prior, int item,
                           int behavior) {
    if (prior.size() != models.size())
        throw ValidationError("bayes_update: belief size does not match model class");
    if (item < 0 || item >= models.items() || behavior < 0 || behavior >= models.behaviors())
        throw ValidationError("bayes_update: observation out of range");
    Vec w(static_cast<size_t>(models.size()));
    double sum = 0.0;
    for (int i = 0; i < models.size(); ++i) {
        w[static_cast<size_t>(i)] = prior[i] * models.models[static_cast<size_t>(i)].prob(item, behavior);
        sum += w[static_cast<size_t>(i)];
    }
    if (sum <= 0.0)
        throw NumericsError("bayes_update: observation has zero likelihood under every model "
                            "with positive prior weight");
    for (double& x : w) x /= sum;
    return Belief(std::move(w));
}

/// Incremental log-space belief tracker for long observation sequences.
/// An optional positive floor keeps every still-alive model's normalized
/// weight from shrinking below it (zero-likelihood knockouts stay at zero);
/// the default floor of 0 preserves exact posterior ratios.
class BeliefTracker {
public:
    explicit BeliefTracker(Belief prior, double floor = 0.0)
        : log_w_(static_cast<size_t>(prior.size())), floor_(floor) {
        if (!(floor >= 0.0) || !std::isfinite(floor))
            throw ValidationError("belief tracker: floor must be a finite value >= 0");
        if (floor > 0.0 && !(floor < 1.0 / static_cast<double>(prior.size())))
            throw ValidationError("belief tracker: floor must be below 1 / (number of models)");
        for (int i = 0; i < prior.size(); ++i)
            log_w_[static_cast<size_t>(i)] = prior[i] > 0.0 ? std::log(prior[i]) : -kInf;
    }

    /// Fold in one observation. Only relative log-weights are maintained;
    /// normalization happens on read.
    void observe(const ModelClass& models, int item, int behavior) {
        if (static_cast<int>(log_w_.size()) != models.size())
            throw ValidationError("belief tracker: model class size changed");
        if (item < 0 || item >= models.items() || behavior < 0 || behavior >= models.behaviors())
            throw ValidationError("belief tracker: observation out of range");
        double best = -kInf;
        for (int i = 0; i < models.size(); ++i) {
            double& lw = log_w_[static_cast<size_t>(i)];
            if (lw == -kInf) continue; // ruled out for good
            double lik = models.models[static_cast<size_t>(i)].prob(item, behavior);
            lw = lik > 0.0 ? lw + std::log(lik) : -kInf;
            if (lw > best) best = lw;
        }
        if (best == -kInf)
            throw NumericsError("belief tracker: observation has zero likelihood under every "
                                "surviving model");
        // Keep log-weights anchored at 0 so they never drift toward -inf
        // under repeated sub-unit likelihoods (-inf - best stays -inf).
        for (double& lw : log_w_) lw -= best;
        if (floor_ > 0.0) {
            double sum = 0.0;
            for (double lw : log_w_)
                if (lw != -kInf) sum += std::exp(lw);
            const double cut = std::log(floor_ * sum);
            for (double& lw : log_w_)
                if (lw != -kInf && lw < cut) lw = cut;
        }
    }

    /// Current normalized belief.
    Belief belief() const {
        Vec w(log_w_.size());
        double best = -kInf;
        for (double lw : log_w_) best = std::max(best, lw);
        double sum = 0.0;
        for (size_t i = 0; i < log_w_.size(); ++i) {
            w[i] = log_w_[i] == -kInf ? 0.0 : std::exp(log_w_[i] - best);
            sum += w[i];
        }
        for (double& x : w) x /= sum;
        return Belief(std::move(w));
    }

private:
    Vec log_w_;
    double floor_ = 0.0;
};

} // namespace platsim

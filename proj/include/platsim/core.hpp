#pragma once

// Core value types for platform/user repeated games: finite item and behavior
// spaces, row-stochastic user strategies, beliefs over a finite model class,
// payoff matrices with declared ranges, and the probability-vector metrics
// (total variation, KL) everything downstream is built on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace platsim {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// Base class for all exceptions thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid inputs: malformed probabilities, out-of-range payoffs, bad sizes.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation: " + what) {}
};

/// Well-formed inputs that hit an undefined or degenerate computation
/// (e.g. a feed rule whose normalizer vanishes, or an empty stable set).
class NumericsError : public Error {
public:
    explicit NumericsError(const std::string& what) : Error("numerics: " + what) {}
};

/// Malformed or unknown configuration input.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

// Tolerances. Strategy rows are user-supplied and often come from text files,
// so they get the looser construction tolerance; beliefs and feed
// distributions are produced by the library itself and must be tight.
inline constexpr double kStrategyRowTol = 1e-9;
inline constexpr double kProbVectorTol = 1e-12;
inline constexpr double kDriftTol = 1e-12;
inline constexpr double kValueTol = 1e-12;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_prob_vector(const Vec& v, double tol, const std::string& what) {
    if (v.empty()) throw ValidationError(what + ": empty probability vector");
    double sum = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw ValidationError(what + ": non-finite entry");
        if (x < -tol) throw ValidationError(what + ": negative entry " + std::to_string(x));
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol)
        throw ValidationError(what + ": entries sum to " + std::to_string(sum) + ", not 1");
}

// Clamp tiny negatives and rescale to an exact unit sum so that downstream
// arithmetic starts from a clean vector regardless of input noise.
inline Vec normalized(Vec v) {
    double sum = 0.0;
    for (double& x : v) {
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

} // namespace detail

namespace detail {

inline void check_labels(const std::vector<std::string>& labels, size_t expected,
                         const std::string& what) {
    if (labels.empty()) return;
    if (labels.size() != expected)
        throw ValidationError(what + ": label count does not match size");
    for (size_t i = 0; i < labels.size(); ++i)
        for (size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] == labels[j])
                throw ValidationError(what + ": duplicate label '" + labels[i] + "'");
}

} // namespace detail

/// Sizes of the finite item space and behavior space, with optional labels
/// for reporting. A meaningful response needs at least two behaviors.
struct Spaces {
    int items = 0;
    int behaviors = 0;
    std::vector<std::string> item_labels;     // optional; unique when present
    std::vector<std::string> behavior_labels; // optional; unique when present

    Spaces() = default;
    Spaces(int n_items, int n_behaviors, std::vector<std::string> ilabels = {},
           std::vector<std::string> blabels = {})
        : items(n_items), behaviors(n_behaviors), item_labels(std::move(ilabels)),
          behavior_labels(std::move(blabels)) {
        if (n_items < 1) throw ValidationError("spaces: need at least one item");
        if (n_behaviors < 2) throw ValidationError("spaces: need at least two behaviors");
        detail::check_labels(item_labels, static_cast<size_t>(n_items), "item labels");
        detail::check_labels(behavior_labels, static_cast<size_t>(n_behaviors), "behavior labels");
    }
};

/// Probability distribution over items (a feed).
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(Vec probs) {
        detail::check_prob_vector(probs, kProbVectorTol, "distribution");
        p_ = detail::normalized(std::move(probs));
    }

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int z) const { return p_[static_cast<size_t>(z)]; }
    const Vec& probs() const { return p_; }

private:
    Vec p_;
};

/// Belief over a finite model class; entries may be exactly zero (models that
/// have been ruled out by a zero-likelihood observation stay at exactly zero).
class Belief {
public:
    Belief() = default;
    explicit Belief(Vec weights) {
        detail::check_prob_vector(weights, kProbVectorTol, "belief");
        w_ = detail::normalized(std::move(weights));
    }

    static Belief uniform(int n) { return Belief(Vec(static_cast<size_t>(n), 1.0 / n)); }

    /// Point mass on one model.
    static Belief vertex(int n, int model) {
        if (model < 0 || model >= n) throw ValidationError("belief vertex out of range");
        Vec w(static_cast<size_t>(n), 0.0);
        w[static_cast<size_t>(model)] = 1.0;
        return Belief(std::move(w));
    }

    int size() const { return static_cast<int>(w_.size()); }
    double operator[](int i) const { return w_[static_cast<size_t>(i)]; }
    const Vec& weights() const { return w_; }

    /// Total mass on a subset of models.
    double mass(const std::vector<int>& models) const {
        double s = 0.0;
        for (int i : models) s += w_[static_cast<size_t>(i)];
        return s;
    }

private:
    Vec w_;
};

/// Row-stochastic map from items to distributions over behaviors. Used both
/// for actual user strategies and for the platform's behavior models.
class Strategy {
public:
    Strategy() = default;
    explicit Strategy(Mat rows) {
        if (rows.empty()) throw ValidationError("strategy: no rows");
        const size_t nb = rows.front().size();
        for (size_t z = 0; z < rows.size(); ++z) {
            if (rows[z].size() != nb)
                throw ValidationError("strategy: ragged rows");
            detail::check_prob_vector(rows[z], kStrategyRowTol, "strategy row " + std::to_string(z));
            rows[z] = detail::normalized(std::move(rows[z]));
        }
        rows_ = std::move(rows);
    }

    int items() const { return static_cast<int>(rows_.size()); }
    int behaviors() const { return static_cast<int>(rows_.front().size()); }
    const Vec& row(int z) const { return rows_[static_cast<size_t>(z)]; }
    double prob(int z, int b) const { return rows_[static_cast<size_t>(z)][static_cast<size_t>(b)]; }
    const Mat& rows() const { return rows_; }

    bool same_shape(const Strategy& other) const {
        return items() == other.items() && behaviors() == other.behaviors();
    }

    bool operator==(const Strategy& other) const { return rows_ == other.rows_; }

private:
    Mat rows_;
};

/// Payoff matrix over (item, behavior) with a declared range; entries outside
/// the declared range are rejected at construction.
class PayoffMatrix {
public:
    PayoffMatrix() = default;
    PayoffMatrix(Mat values, double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo < hi)) throw ValidationError("payoff range: lo must be strictly below hi");
        if (values.empty() || values.front().empty())
            throw ValidationError("payoff matrix: empty");
        const size_t nb = values.front().size();
        for (const auto& row : values) {
            if (row.size() != nb) throw ValidationError("payoff matrix: ragged rows");
            for (double x : row) {
                if (!std::isfinite(x)) throw ValidationError("payoff matrix: non-finite entry");
                if (x < lo - 0.0 || x > hi + 0.0)
                    throw ValidationError("payoff matrix: entry " + std::to_string(x) +
                                          " outside declared range [" + std::to_string(lo) +
                                          ", " + std::to_string(hi) + "]");
            }
        }
        values_ = std::move(values);
    }

    int items() const { return static_cast<int>(values_.size()); }
    int behaviors() const { return static_cast<int>(values_.front().size()); }
    double operator()(int z, int b) const {
        return values_[static_cast<size_t>(z)][static_cast<size_t>(b)];
    }
    const Mat& values() const { return values_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    Mat values_;
    double lo_ = 0.0, hi_ = 0.0;
};

/// The platform's finite hypothesis class of user-behavior models.
struct ModelClass {
    std::vector<Strategy> models;
    std::vector<std::string> names; // optional; defaults to m0, m1, ...

    ModelClass() = default;
    explicit ModelClass(std::vector<Strategy> ms, std::vector<std::string> ns = {})
        : models(std::move(ms)), names(std::move(ns)) {
        if (models.empty()) throw ValidationError("model class: empty");
        for (const auto& m : models)
            if (!m.same_shape(models.front()))
                throw ValidationError("model class: models disagree on shape");
        if (names.empty()) {
            names.reserve(models.size());
            for (size_t i = 0; i < models.size(); ++i)
                names.push_back("m" + std::to_string(i));
        }
        detail::check_labels(names, models.size(), "model names");
    }

    int size() const { return static_cast<int>(models.size()); }
    int items() const { return models.front().items(); }
    int behaviors() const { return models.front().behaviors(); }
};

// ------------------------------------------------------------------ metrics

/// Total variation distance between two probability vectors of equal length:
/// half the L1 distance. Symmetric, in [0, 1] for probability vectors.
inline double total_variation(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ValidationError("total_variation: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

/// KL divergence KL(a ‖ b) with the conventions 0·log(0/x) = 0 and
/// x·log(x/0) = +inf for x > 0. Result is clamped below at 0 so that exact
/// ties cannot produce a tiny negative from rounding.
inline double kl_divergence(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ValidationError("kl_divergence: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.0) continue;
        if (b[i] <= 0.0) return kInf;
        s += a[i] * std::log(a[i] / b[i]);
    }
    return std::max(s, 0.0);
}

/// Upper bound on total variation implied by a KL divergence: sqrt(KL/2).
inline double pinsker_bound(double kl) {
    if (kl < 0.0) throw ValidationError("pinsker_bound: negative divergence");
    return std::sqrt(0.5 * kl);
}

} // namespace platsim

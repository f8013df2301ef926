#pragma once

// Deterministic trajectory simulation of the repeated feed game. Each step
// draws an item from the feed at the current belief, draws the user's
// behavior for that item, records both payoffs, and folds the observation
// into the platform's belief. All randomness is counter-based from the
// trajectory seed, so a (seed, config) pair fully determines the output.

#include <cstdint>
#include <optional>
#include <vector>

#include "bayes.hpp"
#include "instance.hpp"
#include "rng.hpp"

namespace platsim {

struct SimConfig {
    std::uint64_t seed = 1;
    int horizon = 1000;
    /// Record the belief every this many steps (plus always at t = 0 and at
    /// the horizon).
    int snapshot_every = 1;
    /// Optional numerical floor on surviving models' belief mass; 0 keeps
    /// exact posterior ratios.
    double belief_floor = 0.0;
};

struct StepRecord {
    int t = 0;
    int item = 0;
    int behavior = 0;
    double user_payoff = 0.0;
    double platform_payoff = 0.0;
};

struct SnapshotRecord {
    int t = 0;       // number of observations folded in
    Belief belief;   // belief entering step t
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::string generator;
    std::vector<StepRecord> steps;
    std::vector<SnapshotRecord> snapshots;
    Belief final_belief;
};

inline Trajectory simulate(const GameInstance& g, const Strategy& user, const SimConfig& cfg) {
    validate_instance(g);
    if (user.items() != g.spaces.items || user.behaviors() != g.spaces.behaviors)
        throw ValidationError("simulate: user strategy shape does not match instance");
    if (cfg.horizon < 1) throw ValidationError("simulate: horizon must be >= 1");
    if (cfg.snapshot_every < 1) throw ValidationError("simulate: snapshot cadence must be >= 1");
    if (cfg.snapshot_every > cfg.horizon)
        throw ValidationError("simulate: snapshot cadence exceeds horizon");
    for (int i = 0; i < g.initial_belief.size(); ++i)
        if (!(g.initial_belief[i] > 0.0))
            throw ValidationError("simulate: initial belief must give every model positive weight");

    Trajectory traj;
    traj.seed = cfg.seed;
    traj.generator = kGeneratorName;
    traj.steps.reserve(static_cast<size_t>(cfg.horizon));

    BeliefTracker tracker(g.initial_belief, cfg.belief_floor);
    Belief mu = g.initial_belief;
    traj.snapshots.push_back({0, mu});

    for (int t = 0; t < cfg.horizon; ++t) {
        Distribution feed = g.algorithm->propose(g.models, mu);
        int z = sample_categorical(feed.probs(),
                                   uniform01(cfg.seed, kStreamProposal, static_cast<std::uint64_t>(t)));
        int b = sample_categorical(user.row(z),
                                   uniform01(cfg.seed, kStreamBehavior, static_cast<std::uint64_t>(t)));
        traj.steps.push_back({t, z, b, g.user_payoff(z, b), g.platform_payoff(z, b)});
        tracker.observe(g.models, z, b);
        mu = tracker.belief();
        if ((t + 1) % cfg.snapshot_every == 0 || t + 1 == cfg.horizon)
            traj.snapshots.push_back({t + 1, mu});
    }
    traj.final_belief = mu;
    return traj;
}

struct ConvergenceSpec {
    double threshold = 0.99;  // required belief mass on the target models
    int hold_snapshots = 100; // consecutive recorded snapshots that must stay above
};

/**
 * First recorded time at which the belief mass on `target_models` reaches
 * the threshold and stays there for the required number of consecutive
 * recorded snapshots (including the first). Returns nullopt when no such
 * window exists within the trajectory — including when the mass only reaches
 * the threshold too close to the horizon for a full window.
 */
inline std::optional<int> detect_convergence(const Trajectory& traj,
                                             const std::vector<int>& target_models,
                                             const ConvergenceSpec& spec = {}) {
    if (spec.hold_snapshots < 1) throw ValidationError("convergence: hold must be >= 1");
    if (!(spec.threshold > 0.0 && spec.threshold <= 1.0))
        throw ValidationError("convergence: threshold must lie in (0, 1]");
    if (target_models.empty())
        throw ValidationError("convergence: target model set must be non-empty");
    const auto& snaps = traj.snapshots;
    int run = 0;
    for (size_t k = 0; k < snaps.size(); ++k) {
        if (snaps[k].belief.mass(target_models) >= spec.threshold) {
            ++run;
            if (run >= spec.hold_snapshots)
                return snaps[k + 1 - static_cast<size_t>(spec.hold_snapshots)].t;
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

struct SimSummary {
    std::uint64_t seed = 0;
    int horizon = 0;
    double mean_user_payoff = 0.0;
    double mean_platform_payoff = 0.0;
    std::optional<int> convergence_step;
    Belief final_belief;
};

inline SimSummary summarize(const Trajectory& traj, const std::vector<int>& target_models,
                            const ConvergenceSpec& spec = {}) {
    SimSummary s;
    s.seed = traj.seed;
    s.horizon = static_cast<int>(traj.steps.size());
    for (const auto& step : traj.steps) {
        s.mean_user_payoff += step.user_payoff;
        s.mean_platform_payoff += step.platform_payoff;
    }
    if (!traj.steps.empty()) {
        s.mean_user_payoff /= static_cast<double>(traj.steps.size());
        s.mean_platform_payoff /= static_cast<double>(traj.steps.size());
    }
    s.convergence_step = detect_convergence(traj, target_models, spec);
    s.final_belief = traj.final_belief;
    return s;
}

} // namespace platsim

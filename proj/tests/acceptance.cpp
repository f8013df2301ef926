// Acceptance gate: one binary that exercises every release criterion and
// prints a single pass/fail line per criterion. Exit code is the number of
// failed criteria, so CI can gate on it directly.
//
// Each criterion re-derives its expected numbers from first principles
// (closed-form arithmetic written out inline) rather than trusting any
// engine helper, and then checks the engine against them.

#include <platsim/platsim.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace platsim;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
    void note(const std::string& text) {
        if (ok) detail = text;
    }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

void stylized_convergence(Check& c) {
    StylizedInstance inst = make_stylized(detail::s1_params());
    struct Case {
        std::vector<int> clicks;
        int survivor;
    };
    const std::vector<Case> cases = {
        {{0, 1, 2}, inst.model_a},          // support inside half A
        {{4, 5}, inst.model_b},             // support inside half B
        {{0, 1, 2, 4, 5}, inst.model_flat}, // support split across halves
    };

    int converged = 0;
    for (const Case& cs : cases) {
        Strategy user = detail::click_only(8, cs.clicks);

        // Closed-form oracle and the generic elimination must agree exactly.
        c.require(stylized_stable_set(inst, user) == cs.survivor,
                  "closed-form survivor mismatch");
        StableSetResult st = stable_set(inst.game, user);
        c.require(st.survivors == std::vector<int>{cs.survivor},
                  "generic stable set differs from the closed form");

        // Seeded runs must reach the surviving model and hold >= 0.99.
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            SimConfig sim;
            sim.seed = 900 + seed;
            sim.horizon = 5000;
            sim.snapshot_every = 10;
            Trajectory traj = simulate(inst.game, user, sim);
            std::optional<int> step = detect_convergence(traj, {cs.survivor});
            c.require(step.has_value(), "a trajectory never reached/held 0.99");
            c.require(traj.final_belief[cs.survivor] >= 0.99,
                      "final belief mass fell below 0.99");
            if (step) ++converged;
        }
    }
    c.require(converged == 60, "not all 60 runs converged");
    c.note("3 support cases x 20 seeds at T=5000 reach and hold 0.99");
}

// ---------------------------------------------------------------- criterion 2

void closed_form_values(Check& c) {
    StylizedInstance inst = make_stylized(detail::s1_params());

    // Closed forms, written out: uniform feed gives the naive user 5/8;
    // clicking {0,1,2} pins the A-model whose feed is e/8 + (1-e)/4 per
    // A item, so the strategic user collects 3 * 0.2375.
    const double naive_expected = 5.0 / 8.0;
    const double strategic_expected = 3.0 * (0.1 / 8.0 + 0.9 / 4.0);

    TrustReport tr = trust_audit(inst.game, CandidateSpec{}, 0.0);
    c.require(std::abs(tr.strategic_value - strategic_expected) <= 1e-12,
              fmt("strategic value %.17g != %.17g", tr.strategic_value, strategic_expected));
    c.require(std::abs(tr.naive_value - naive_expected) <= 1e-12,
              fmt("naive value %.17g != %.17g", tr.naive_value, naive_expected));
    c.require(std::abs(tr.strategic_value - 0.7125) <= 1e-12, "strategic value != 0.7125");
    c.require(std::abs(tr.naive_value - 0.625) <= 1e-12, "naive value != 0.625");

    // When every liked item sits in one half, restriction cannot help and
    // the solver must return the greedy best response itself.
    StylizedParams contained = detail::s1_params();
    contained.liked = {0, 1};
    StylizedInstance inst2 = make_stylized(contained);
    SolveResult sol2 = solve_strategic(inst2.game, CandidateSpec{});
    Strategy greedy2 = naive_best_response(inst2.game.user_payoff);
    bool same = true;
    for (int z = 0; z < 8; ++z)
        for (int b = 0; b < 2; ++b)
            same = same && sol2.best.prob(z, b) == greedy2.prob(z, b);
    c.require(same, "solver deviated from greedy on the one-half-liked variant");
    c.note(fmt("strategic %.4f vs naive %.4f within 1e-12; contained case stays greedy",
               tr.strategic_value, tr.naive_value));
}

// ---------------------------------------------------------------- criterion 3

void strategization_helps_platform(Check& c) {
    const int instances = 100;
    double min_margin = kInf;
    for (int i = 0; i < instances; ++i) {
        StylizedInstance inst =
            make_stylized(sample_stylized_params(4242, static_cast<std::uint64_t>(i)));
        SolveResult sol = solve_strategic(inst.game, CandidateSpec{});
        Strategy greedy = naive_best_response(inst.game.user_payoff);
        StableSetResult ns = stable_set(inst.game, greedy);
        const double naive_platform =
            worst_case_platform_value(inst.game, greedy, ns.survivors, DominanceParams{}).value;
        min_margin = std::min(min_margin, sol.worst_platform_value - naive_platform);
        c.require(sol.worst_platform_value >= naive_platform - 1e-12,
                  fmt("instance %.0f: strategic platform payoff below naive", double(i)));
        if (!c.ok) return;
    }
    c.note(fmt("100 random instances; min(strategic - naive) platform margin = %.3g",
               min_margin));
}

// ---------------------------------------------------------------- criterion 4

void toxicity_ordering(Check& c) {
    // Independent closed forms for gamma=0.25, eps=0.1, alpha=0.01 with item
    // counts n1=|A∩liked|=3, n2=|A∖liked|=1, n3=|B∩liked|=2, n4=|B∖liked|=2.
    const double g = 0.25, e = 0.1, a = 0.01;
    const double n1 = 3, n2 = 1, n3 = 2, n4 = 2, n = 8;
    const double current = (1 - g) * (e * (n1 + n2) / n + (1 - e)); // = 0.7125
    const double current_user = e * n1 / n + (1 - e) * n1 / (n1 + n2);
    const double denom = a * n1 + n2 + n3 + a * n4;
    const double predicted_cf = (1 - g) * (e * (a * n1 + n2) / denom + (1 - e));
    const double true_cf = e * n3 / denom + (1 - e) * n3 / (n3 + a * n4);
    c.require(std::abs(current - current_user) <= 1e-12, "closed forms disagree at p");

    ToxicityAuditSetup setup = make_toxicity_audit_instance(a);
    UserParams strategic; // strategic is the default mode

    CounterfactualReport same =
        counterfactual_audit(setup.stylized.game, setup.stylized.game.algorithm, strategic);
    c.require(std::abs(same.predicted - current) <= 1e-9,
              fmt("self-audit predicted %.12f != %.12f", same.predicted, current));
    c.require(std::abs(same.true_value - current) <= 1e-9,
              fmt("self-audit true %.12f != %.12f", same.true_value, current));

    CounterfactualReport cf =
        counterfactual_audit(setup.stylized.game, setup.counterfactual, strategic);
    c.require(std::abs(cf.predicted - predicted_cf) <= 1e-9,
              fmt("predicted %.12f != closed form %.12f", cf.predicted, predicted_cf));
    c.require(std::abs(cf.true_value - true_cf) <= 1e-9,
              fmt("true %.12f != closed form %.12f", cf.true_value, true_cf));
    c.require(cf.predicted < current, "prediction is not pessimistic about the switch");
    c.require(current < cf.true_value, "truth does not improve on the current rule");
    c.note(fmt("predicted %.4f < current %.4f < true %.4f", cf.predicted, current,
               cf.true_value));
}

// ---------------------------------------------------------------- criterion 5

void expanded_class_drop(Check& c) {
    ExpandedClassSetup setup = make_expanded_class_instance();
    SolveResult before = solve_strategic(setup.before.game, CandidateSpec{});
    SolveResult after = solve_strategic(setup.after, CandidateSpec{});
    const double drop = before.worst_platform_value - after.worst_platform_value;
    c.require(drop >= 0.01,
              fmt("platform payoff dropped by %.6f < 0.01", drop));
    c.note(fmt("worst-case platform payoff %.4f -> %.4f (drop %.4f)",
               before.worst_platform_value, after.worst_platform_value, drop));
}

// ---------------------------------------------------------------- criterion 6

void bayes_oracle(Check& c) {
    // Part A: random posteriors against a long-double direct-space reference.
    int done = 0;
    std::uint64_t k = 0;
    auto u = [&] { return uniform01(2027, 0x60, k++); };
    while (done < 1000) {
        const int m = 2 + static_cast<int>(u() * 4.0);  // 2..5 models
        const int nb = 2 + static_cast<int>(u() * 3.0); // 2..4 behaviors
        const int nz = 1 + static_cast<int>(u() * 4.0); // 1..4 items
        std::vector<Strategy> entries;
        for (int i = 0; i < m; ++i) {
            Mat rows;
            for (int z = 0; z < nz; ++z) {
                Vec row(static_cast<size_t>(nb));
                double s = 0.0;
                for (int b = 0; b < nb; ++b) {
                    double x = u();
                    if (x < 0.15) x = 0.0; // sprinkle exact zeros
                    row[static_cast<size_t>(b)] = x;
                    s += x;
                }
                if (s == 0.0) {
                    row[0] = 1.0;
                    s = 1.0;
                }
                for (double& x : row) x /= s;
                rows.push_back(std::move(row));
            }
            entries.emplace_back(rows);
        }
        ModelClass models(entries);
        Vec prior_w(static_cast<size_t>(m));
        double ps = 0.0;
        for (double& w : prior_w) {
            w = 0.05 + u();
            ps += w;
        }
        for (double& w : prior_w) w /= ps;
        Belief prior{prior_w};

        const int z = static_cast<int>(u() * nz);
        const int b = static_cast<int>(u() * nb);
        long double denom = 0.0L;
        std::vector<long double> direct(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            direct[static_cast<size_t>(i)] =
                static_cast<long double>(prior[i]) *
                static_cast<long double>(models.models[static_cast<size_t>(i)].prob(z, b));
            denom += direct[static_cast<size_t>(i)];
        }
        if (denom <= 0.0L) continue; // observation impossible under every model

        Belief post = bayes_update(models, prior, z, b);
        for (int i = 0; i < m; ++i) {
            const double expect = static_cast<double>(direct[static_cast<size_t>(i)] / denom);
            c.require(std::abs(post[i] - expect) <= 1e-12,
                      fmt("posterior entry off by %.3g", std::abs(post[i] - expect)));
        }
        if (!c.ok) return;
        ++done;
    }

    // Part B: belief normalization over a long trajectory.
    StylizedInstance inst = make_stylized(detail::s1_params());
    Strategy user = detail::click_only(8, {0, 1, 2, 4, 5});
    SimConfig sim;
    sim.seed = 31;
    sim.horizon = 10000;
    sim.snapshot_every = 1;
    Trajectory traj = simulate(inst.game, user, sim);
    c.require(traj.snapshots.size() == 10001, "expected a dense snapshot per step");
    for (const auto& snap : traj.snapshots) {
        double s = 0.0;
        for (int i = 0; i < snap.belief.size(); ++i) {
            c.require(snap.belief[i] >= 0.0 && snap.belief[i] <= 1.0, "belief out of [0,1]");
            s += snap.belief[i];
        }
        c.require(std::abs(s - 1.0) <= 1e-12, fmt("belief sum drifted to %.17g", s));
        if (!c.ok) return;
    }
    c.note("1000 random posteriors within 1e-12; normalized across T=10000");
}

// ---------------------------------------------------------------- criterion 7

void net_survivor_bound(Check& c) {
    const double eps = 0.25;
    const double bound = net_survivor_kl_bound(2, eps); // log 2
    c.require(std::abs(bound - std::log(2.0)) <= 1e-15, "bound formula changed");

    DominanceParams params;
    params.grid_resolution = 1;

    int survivors_checked = 0;
    for (int i = 0; i < 50; ++i) {
        std::uint64_t k = 0;
        auto u = [&] {
            return uniform01(9000 + static_cast<std::uint64_t>(i), 0x70, k++);
        };
        const int nz = 1 + static_cast<int>(u() * 3.0); // 1..3 items

        GameInstance g;
        g.spaces = Spaces{nz, 2};
        g.models = epsilon_net_class(g.spaces, eps);
        g.user_payoff = PayoffMatrix(Mat(static_cast<size_t>(nz), Vec{0.0, 1.0}), 0.0, 1.0);
        g.platform_payoff = g.user_payoff;
        g.initial_belief = Belief::uniform(g.models.size());
        g.algorithm = std::make_shared<UniformProposer>();

        Mat rows;
        for (int z = 0; z < nz; ++z) {
            const double q = 0.02 + 0.96 * u();
            rows.push_back({1.0 - q, q});
        }
        Strategy user{rows};

        StableSetResult st = stable_set(g, user, params);
        c.require(!st.survivors.empty(), "elimination emptied the net class");
        for (int idx : st.survivors) {
            const double kl = worst_item_kl(user, g.models.models[static_cast<size_t>(idx)]);
            c.require(kl <= bound + 1e-9,
                      fmt("survivor KL %.6f above log 2 on instance %.0f", kl, double(i)));
            ++survivors_checked;
        }
        if (!c.ok) return;
    }
    c.note(fmt("50 instances, %.0f survivors all within KL <= log 2",
               double(survivors_checked)));
}

// ---------------------------------------------------------------- criterion 8

void predictability_bound(Check& c) {
    DominanceParams params;
    params.grid_resolution = 1;

    for (double eps : {0.25, 0.125}) {
        GameInstance g;
        g.spaces = Spaces{2, 2};
        g.models = epsilon_net_class(g.spaces, eps);
        g.user_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, -1.0}}, -1.0, 1.0);
        g.platform_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, 1.0}}, 0.0, 1.0);
        g.initial_belief = Belief::uniform(g.models.size());
        g.algorithm = std::make_shared<UniformProposer>();

        auto p_cf = std::make_shared<UniformProposer>();
        PredictabilityCheck pc = br_predictability_check(g, p_cf, eps, std::nullopt, params);

        const double expected = std::sqrt(2.0 * eps); // (2L+1)√(|B|ε) with exact L = 0
        c.require(pc.lipschitz.source == LipschitzEstimate::Source::Exact,
                  "constant-in-belief rule not recognized as exact");
        c.require(std::abs(pc.bound - expected) <= 1e-12,
                  fmt("bound %.12f != %.12f at eps=%.3f", pc.bound, expected, eps));
        c.require(pc.holds, fmt("gap %.6f exceeded the bound at eps=%.3f",
                                pc.empirical_gap, eps));
        c.require(pc.empirical_gap <= expected + 1e-12, "empirical gap above the bound");
    }
    c.note(fmt("gap within (2L+1)*sqrt(2*eps) for eps=0.25 (%.4f) and 0.125 (%.4f)",
               std::sqrt(0.5), 0.5));
}

// ---------------------------------------------------------------- criterion 9

void determinism(Check& c) {
    std::random_device rd;
    const fs::path root =
        fs::temp_directory_path() /
        ("platsim_accept_" + std::to_string(std::uniform_int_distribution<unsigned>()(rd)));
    fs::create_directories(root);

    const char* config = R"({
      "scenario": {"kind": "stylized", "partition_a": [0, 1, 2, 3],
                   "partition_b": [4, 5, 6, 7], "liked": [0, 1, 2, 4, 5]},
      "user": {"mode": "naive"},
      "simulate": {"seed": 5, "seeds": 3, "horizon": 400, "snapshot_every": 40}
    })";
    const fs::path cfg = root / "cfg.json";
    {
        std::ofstream out(cfg, std::ios::binary);
        out << config;
    }

    // Two full CLI runs (one parallel) plus a strategic audit, twice each.
    std::ostringstream sink;
    std::streambuf* old_out = std::cout.rdbuf(sink.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(sink.rdbuf());
    int rc = 0;
    rc |= run_cli({"simulate", "--config", cfg.string(), "--out", (root / "r1").string()});
    rc |= run_cli({"simulate", "--config", cfg.string(), "--out", (root / "r2").string(),
                   "--jobs", "3"});
    rc |= run_cli({"trust", "--config", cfg.string(), "--out", (root / "t1").string()});
    rc |= run_cli({"trust", "--config", cfg.string(), "--out", (root / "t2").string()});
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    c.require(rc == 0, "a CLI run failed");

    int files = 0;
    if (c.ok) {
        for (const auto& entry : fs::directory_iterator(root / "r1")) {
            const std::string name = entry.path().filename().string();
            c.require(read_file(root / "r2" / name) == read_file(entry.path()),
                      "simulate outputs differ: " + name);
            ++files;
        }
        for (const auto& entry : fs::directory_iterator(root / "t1")) {
            const std::string name = entry.path().filename().string();
            c.require(read_file(root / "t2" / name) == read_file(entry.path()),
                      "trust outputs differ: " + name);
            ++files;
        }
        c.require(files >= 6, "expected at least six emitted artifacts");
    }

    std::error_code ec;
    fs::remove_all(root, ec);
    c.note(fmt("%.0f artifacts byte-identical across reruns (including --jobs 3)",
               double(files)));
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Check&)> run;
        double limit_seconds; // 0 = no limit
    };
    const std::vector<Criterion> criteria = {
        {"stylized stable sets and belief convergence", stylized_convergence, 60.0},
        {"strategic 0.7125 vs naive 0.625 closed forms", closed_form_values, 0.0},
        {"strategization never hurts the platform", strategization_helps_platform, 300.0},
        {"toxicity audit ordering on the calibrated instance", toxicity_ordering, 0.0},
        {"expanded class drops the platform payoff", expanded_class_drop, 0.0},
        {"Bayes updates match a direct-space reference", bayes_oracle, 0.0},
        {"epsilon-net survivors stay within log 2 KL", net_survivor_bound, 0.0},
        {"counterfactual gap within the predictability bound", predictability_bound, 0.0},
        {"byte-identical outputs across reruns", determinism, 0.0},
    };

    std::printf("acceptance: %zu criteria\n", criteria.size());
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].run(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.ok && criteria[i].limit_seconds > 0.0 && secs > criteria[i].limit_seconds) {
            c.ok = false;
            c.detail = fmt("runtime %.1fs exceeded the %.0fs budget", secs,
                           criteria[i].limit_seconds);
        }
        std::printf("%s %zu. %s (%.1fs)%s%s\n", c.ok ? "✓" : "✗", i + 1,
                    criteria[i].name, secs, c.detail.empty() ? "" : " — ",
                    c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu criteria passed\n", criteria.size());
    else
        std::printf("%d of %zu criteria FAILED\n", failures, criteria.size());
    return failures;
}

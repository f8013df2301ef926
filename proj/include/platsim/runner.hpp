#pragma once

// Command layer: each CLI subcommand as a testable function plus the
// argument-parsing entry point. Commands read one experiment config, run
// the engines, and write reports (JSON), tables (CSV), trajectories
// (JSONL), and charts (SVG) atomically into an output directory. Seed- and
// study-level work runs under a bounded worker pool; results land in
// pre-assigned slots so the emitted bytes never depend on scheduling.

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "io.hpp"
#include "svg.hpp"

namespace platsim {

namespace detail {

inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::string fixed_json(const Json& j) { return j.dump(2) + "\n"; }

} // namespace detail

/// Option overrides passed on the command line; recorded in report metadata
/// because they change results without changing the config hash.
struct CliOverrides {
    std::optional<int> seeds;
    std::optional<int> grid_resolution;
    std::optional<double> margin_tolerance;
    int jobs = 1;
};

inline void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
    if (ov.seeds) {
        if (*ov.seeds < 1) throw ConfigError("--seeds must be >= 1");
        cfg.seeds.clear();
        for (int i = 0; i < *ov.seeds; ++i)
            cfg.seeds.push_back(cfg.sim.seed + static_cast<std::uint64_t>(i));
        cfg.reproduce_seeds = *ov.seeds;
    }
    if (ov.grid_resolution) cfg.dominance.grid_resolution = *ov.grid_resolution;
    if (ov.margin_tolerance) cfg.dominance.margin_tolerance = *ov.margin_tolerance;
}

inline Json overrides_json(const CliOverrides& ov) {
    Json j = Json::object();
    if (ov.seeds) j["seeds"] = *ov.seeds;
    if (ov.grid_resolution) j["grid_resolution"] = *ov.grid_resolution;
    if (ov.margin_tolerance) j["margin_tolerance"] = *ov.margin_tolerance;
    return j;
}

inline Json command_metadata(const ExperimentConfig& cfg, const CliOverrides& ov,
                             const std::string& command) {
    Json m = report_metadata(cfg);
    m["command"] = command;
    Json o = overrides_json(ov);
    if (!o.empty()) m["overrides"] = std::move(o);
    return m;
}

// ------------------------------------------------------------------ commands

inline void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out,
                         const CliOverrides& ov = {}) {
    ResolvedScenario sc = resolve_scenario(cfg);
    ResolvedUser user = resolve_user(sc.game, cfg.user, cfg.dominance);
    const std::vector<int>& targets = user.stable.survivors;

    const int n = static_cast<int>(cfg.seeds.size());
    std::vector<SimSummary> summaries(static_cast<size_t>(n));
    std::vector<std::string> files(static_cast<size_t>(n));
    detail::parallel_for(n, ov.jobs, [&](int i) {
        SimConfig c = cfg.sim;
        c.seed = cfg.seeds[static_cast<size_t>(i)];
        Trajectory traj = simulate(sc.game, user.strategy, c);
        summaries[static_cast<size_t>(i)] = summarize(traj, targets, cfg.convergence);
        files[static_cast<size_t>(i)] = trajectory_jsonl(traj, sc.game.models);
    });
    for (int i = 0; i < n; ++i)
        atomic_write(out / ("trajectory_seed" + std::to_string(cfg.seeds[static_cast<size_t>(i)]) +
                            ".jsonl"),
                     files[static_cast<size_t>(i)]);

    CsvTable csv;
    csv.header = {"seed", "convergence_step"};
    for (const auto& name : sc.game.models.names) csv.header.push_back("final_belief_" + name);
    csv.header.push_back("mean_u");
    csv.header.push_back("mean_v");
    for (const auto& s : summaries) {
        std::vector<std::string> row;
        row.push_back(std::to_string(s.seed));
        row.push_back(s.convergence_step ? std::to_string(*s.convergence_step) : "");
        for (int m = 0; m < s.final_belief.size(); ++m) row.push_back(g17(s.final_belief[m]));
        row.push_back(g17(s.mean_user_payoff));
        row.push_back(g17(s.mean_platform_payoff));
        csv.rows.push_back(std::move(row));
    }
    atomic_write(out / "summary.csv", csv.str());

    Json report;
    report["metadata"] = command_metadata(cfg, ov, "simulate");
    Json targets_json = Json::array();
    for (int t : targets) targets_json.push_back(sc.game.models.names[static_cast<size_t>(t)]);
    report["target_models"] = std::move(targets_json);
    Json sums = Json::array();
    for (const auto& s : summaries) {
        Json j;
        j["seed"] = s.seed;
        j["horizon"] = s.horizon;
        j["mean_u"] = json_num(s.mean_user_payoff);
        j["mean_v"] = json_num(s.mean_platform_payoff);
        if (s.convergence_step) j["convergence_step"] = *s.convergence_step;
        j["final_belief"] = belief_json(s.final_belief);
        sums.push_back(std::move(j));
    }
    report["summaries"] = std::move(sums);
    atomic_write(out / "report.json", detail::fixed_json(report));
}

inline void run_stable_set(const ExperimentConfig& cfg, const std::filesystem::path& out,
                           const CliOverrides& ov = {}) {
    ResolvedScenario sc = resolve_scenario(cfg);
    ResolvedUser user = resolve_user(sc.game, cfg.user, cfg.dominance);

    Json report;
    report["metadata"] = command_metadata(cfg, ov, "stable-set");
    report["user_mode"] = cfg.user.mode == UserParams::Mode::Naive ? "naive" : "strategic";
    report["user_strategy"] = strategy_json(user.strategy);
    report["stable_set"] = stable_set_json(user.stable, sc.game.models);
    atomic_write(out / "report.json", detail::fixed_json(report));

    CsvTable csv;
    csv.header = {"kind", "model", "dominator", "margin", "round"};
    for (int s : user.stable.survivors)
        csv.rows.push_back({"survivor", sc.game.models.names[static_cast<size_t>(s)], "", "", ""});
    for (const auto& e : user.stable.eliminated)
        csv.rows.push_back({"eliminated", sc.game.models.names[static_cast<size_t>(e.model)],
                            sc.game.models.names[static_cast<size_t>(e.dominator)], g17(e.margin),
                            std::to_string(e.round)});
    atomic_write(out / "stable_set.csv", csv.str());
}

namespace detail {

inline double naive_worst_platform(const GameInstance& g, const DominanceParams& params) {
    Strategy greedy = naive_best_response(g.user_payoff);
    StableSetResult ns = stable_set(g, greedy, params);
    return worst_case_platform_value(g, greedy, ns.survivors, params).value;
}

} // namespace detail

inline void run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out,
                      const CliOverrides& ov = {}) {
    ResolvedScenario sc = resolve_scenario(cfg);
    SolveResult sol = solve_strategic(sc.game, cfg.user.candidates, cfg.dominance);
    const double naive_platform = detail::naive_worst_platform(sc.game, cfg.dominance);

    Json report;
    report["metadata"] = command_metadata(cfg, ov, "solve");
    report["solution"] = solve_json(sol, sc.game);
    report["payoff_comparison"] = {{"labels", {"strategic", "naive"}},
                                   {"values", {json_num(sol.worst_platform_value),
                                               json_num(naive_platform)}}};
    atomic_write(out / "report.json", detail::fixed_json(report));

    CsvTable csv;
    csv.header = {"id", "worst_user_value", "worst_platform_value", "deviation_cost", "survivors"};
    for (const auto& o : sol.outcomes) {
        std::string survivors;
        for (size_t i = 0; i < o.survivors.size(); ++i) {
            if (i) survivors += "|";
            survivors += sc.game.models.names[static_cast<size_t>(o.survivors[i])];
        }
        csv.rows.push_back({std::to_string(o.id), g17(o.worst_user_value),
                            g17(o.worst_platform_value), g17(o.deviation_cost), survivors});
    }
    atomic_write(out / "candidates.csv", csv.str());
}

inline void run_trust(const ExperimentConfig& cfg, const std::filesystem::path& out,
                      const CliOverrides& ov = {}) {
    ResolvedScenario sc = resolve_scenario(cfg);
    TrustReport tr = trust_audit(sc.game, cfg.user.candidates, cfg.kappa0, cfg.dominance);

    Json report;
    report["metadata"] = command_metadata(cfg, ov, "trust");
    report["trust"] = trust_json(tr, sc.game);
    report["payoff_comparison"] = {{"labels", {"strategic", "naive"}},
                                   {"values", {json_num(tr.strategic_value),
                                               json_num(tr.naive_value)}}};
    atomic_write(out / "report.json", detail::fixed_json(report));

    CsvTable csv;
    csv.header = {"strategic_value", "naive_value", "strategization_gap", "kappa", "kappa0",
                  "trustworthy"};
    csv.rows.push_back({g17(tr.strategic_value), g17(tr.naive_value), g17(tr.strategization_gap),
                        g17(tr.kappa), g17(tr.kappa0), tr.trustworthy ? "true" : "false"});
    atomic_write(out / "trust.csv", csv.str());
}

inline void run_counterfactual(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               const CliOverrides& ov = {}) {
    ResolvedScenario sc = resolve_scenario(cfg);
    if (!sc.counterfactual)
        throw ConfigError("counterfactual: the config names no counterfactual algorithm "
                          "(section 'counterfactual.algorithm', or a scenario that provides one)");
    CounterfactualReport rep =
        counterfactual_audit(sc.game, sc.counterfactual, cfg.user, cfg.dominance);

    Json report;
    report["metadata"] = command_metadata(cfg, ov, "counterfactual");
    report["counterfactual"] = counterfactual_json(rep);
    report["payoff_comparison"] = {{"labels", {"predicted", "true"}},
                                   {"values", {json_num(rep.predicted), json_num(rep.true_value)}}};
    atomic_write(out / "report.json", detail::fixed_json(report));

    CsvTable csv;
    csv.header = {"predicted", "true_value", "gap", "algorithm_shift", "best_vertex"};
    csv.rows.push_back({g17(rep.predicted), g17(rep.true_value), g17(rep.gap),
                        g17(rep.algorithm_shift), std::to_string(rep.best_vertex)});
    atomic_write(out / "counterfactual.csv", csv.str());
}

/// Returns the human-readable pass/fail table it also writes next to the
/// JSON report.
inline std::string run_reproduce(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                 const CliOverrides& ov = {}, bool* all_pass_out = nullptr) {
    StudyOptions opt;
    opt.seeds = cfg.reproduce_seeds;
    opt.horizon = cfg.reproduce_horizon;
    opt.sensitivity_sweep = cfg.sensitivity_sweep;
    opt.dominance = cfg.dominance;

    const int n = static_cast<int>(cfg.studies.size());
    std::vector<StudyReport> reports(static_cast<size_t>(n));
    detail::parallel_for(n, ov.jobs, [&](int i) {
        reports[static_cast<size_t>(i)] = reproduce_study(cfg.studies[static_cast<size_t>(i)], opt);
    });

    bool all_pass = true;
    Json report;
    report["metadata"] = command_metadata(cfg, ov, "reproduce");
    Json studies = Json::array();
    for (const auto& r : reports) {
        studies.push_back(study_json(r));
        all_pass = all_pass && r.pass;
    }
    report["studies"] = std::move(studies);
    report["all_pass"] = all_pass;

    // Payoff bars for the chart emitter: the strategic-vs-naive comparison,
    // when that study ran.
    for (const auto& r : reports) {
        if (r.study != "platform_alignment" || r.checks.size() < 2) continue;
        report["payoff_comparison"] = {
            {"labels", {"strategic", "naive"}},
            {"values", {json_num(r.checks[0].computed), json_num(r.checks[1].computed)}}};
    }
    atomic_write(out / "report.json", detail::fixed_json(report));

    CsvTable csv;
    csv.header = {"study_id", "study", "check", "analytic", "computed", "delta", "tolerance",
                  "pass"};
    for (const auto& r : reports) {
        for (const auto& c : r.checks)
            csv.rows.push_back({std::to_string(r.id), r.study, c.name, g17(c.analytic),
                                g17(c.computed), g17(c.delta), g17(c.tolerance),
                                c.pass ? "true" : "false"});
        if (!r.error.empty())
            csv.rows.push_back({std::to_string(r.id), r.study, "<error>", "", "", "", "", "false"});
    }
    atomic_write(out / "reproduce.csv", csv.str());

    std::ostringstream table;
    table << "study                         result\n";
    for (const auto& r : reports) {
        std::string name = std::to_string(r.id) + " " + r.study;
        name.resize(30, ' ');
        table << name << (r.pass ? "pass" : "FAIL");
        if (!r.error.empty()) table << "  (" << r.error << ")";
        table << "\n";
    }
    if (all_pass_out) *all_pass_out = all_pass;
    return table.str();
}

/// Build charts from a directory holding trajectory files and/or a report
/// with a payoff comparison. Missing inputs are an error.
inline void run_charts(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> traj_files;
    if (fs::exists(dir))
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("trajectory_", 0) == 0 && entry.path().extension() == ".jsonl")
                traj_files.push_back(entry.path());
        }
    std::sort(traj_files.begin(), traj_files.end());
    const fs::path report_path = dir / "report.json";
    const bool have_report = fs::exists(report_path);
    if (traj_files.empty() && !have_report)
        throw Error("charts: no trajectory files or report.json in '" + dir.string() + "'");

    if (!traj_files.empty()) {
        std::vector<Series> series;
        CsvTable csv;
        bool header_done = false;
        for (const auto& path : traj_files) {
            const std::string text = read_file(path);
            // Model names live in the file's header record.
            std::vector<std::string> names;
            {
                std::istringstream in(text);
                std::string first;
                std::getline(in, first);
                Json h = Json::parse(first);
                names = h.at("models").get<std::vector<std::string>>();
            }
            Trajectory traj = parse_trajectory_jsonl(text);
            if (!header_done) {
                csv.header = {"file", "seed", "t"};
                for (const auto& n : names) csv.header.push_back("belief_" + n);
                header_done = true;
            }
            std::vector<size_t> series_at;
            for (const auto& n : names) {
                series.push_back({n, {}});
                series_at.push_back(series.size() - 1);
            }
            for (const auto& snap : traj.snapshots) {
                std::vector<std::string> row = {path.filename().string(),
                                                std::to_string(traj.seed),
                                                std::to_string(snap.t)};
                for (int m = 0; m < snap.belief.size(); ++m) {
                    series[series_at[static_cast<size_t>(m)]].points.push_back(
                        {static_cast<double>(snap.t), snap.belief[m]});
                    row.push_back(g17(snap.belief[m]));
                }
                csv.rows.push_back(std::move(row));
            }
        }
        atomic_write(dir / "belief_trajectories.svg",
                     line_chart_svg("Belief trajectories", "step", "belief mass", series));
        atomic_write(dir / "belief_trajectories.csv", csv.str());
    }

    if (have_report) {
        Json report = Json::parse(read_file(report_path));
        if (report.contains("payoff_comparison")) {
            const Json& pc = report["payoff_comparison"];
            std::vector<std::string> labels = pc.at("labels").get<std::vector<std::string>>();
            Vec values;
            for (const auto& v : pc.at("values"))
                values.push_back(v.is_number() ? v.get<double>() : 0.0);
            atomic_write(dir / "payoff_comparison.svg",
                         bar_chart_svg("Worst-case payoff comparison", "payoff", labels, values));
            CsvTable csv;
            csv.header = {"label", "value"};
            for (size_t i = 0; i < labels.size(); ++i)
                csv.rows.push_back({labels[i], g17(values[i])});
            atomic_write(dir / "payoff_comparison.csv", csv.str());
        }
    }
}

// ---------------------------------------------------------------------- CLI

/// Parse arguments (no program name) and run the selected command.
/// Returns the process exit code.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"Repeated-game simulator for data-driven platforms and strategic users"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    CliOverrides ov;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (config_required) c->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", ov.jobs, "max parallel workers");
        sub->add_option("--seeds", [&ov](const std::vector<std::string>& vals) {
            ov.seeds = std::stoi(vals.at(0));
            return true;
        }, "override the number of seeds");
        sub->add_option("--grid-k", [&ov](const std::vector<std::string>& vals) {
            ov.grid_resolution = std::stoi(vals.at(0));
            return true;
        }, "override the belief-grid resolution");
        sub->add_option("--tau-dom", [&ov](const std::vector<std::string>& vals) {
            ov.margin_tolerance = std::stod(vals.at(0));
            return true;
        }, "override the dominance margin tolerance");
    };

    CLI::App* cmd_simulate = app.add_subcommand("simulate", "run seeded trajectories");
    CLI::App* cmd_stable = app.add_subcommand("stable-set", "surviving models for the configured user");
    CLI::App* cmd_solve = app.add_subcommand("solve", "strategic user's max-min strategy");
    CLI::App* cmd_trust = app.add_subcommand("trust", "strategization-gap audit");
    CLI::App* cmd_cf = app.add_subcommand("counterfactual", "predicted-vs-true payoff audit");
    CLI::App* cmd_repro = app.add_subcommand("reproduce", "re-derive the benchmark results");
    CLI::App* cmd_charts = app.add_subcommand("charts", "render charts for an output directory");
    for (CLI::App* sub : {cmd_simulate, cmd_stable, cmd_solve, cmd_trust, cmd_cf, cmd_repro})
        add_common(sub, true);
    add_common(cmd_charts, false);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const std::filesystem::path out(out_dir);
        if (cmd_charts->parsed()) {
            run_charts(out);
            std::cout << "charts written to " << out.string() << "\n";
            return 0;
        }
        ExperimentConfig cfg = load_experiment_config(config_path);
        apply_overrides(cfg, ov);
        if (cmd_simulate->parsed()) {
            run_simulate(cfg, out, ov);
            std::cout << "wrote " << cfg.seeds.size() << " trajectories and summary.csv to "
                      << out.string() << "\n";
        } else if (cmd_stable->parsed()) {
            run_stable_set(cfg, out, ov);
            std::cout << "wrote stable-set report to " << out.string() << "\n";
        } else if (cmd_solve->parsed()) {
            run_solve(cfg, out, ov);
            std::cout << "wrote solve report to " << out.string() << "\n";
        } else if (cmd_trust->parsed()) {
            run_trust(cfg, out, ov);
            std::cout << "wrote trust report to " << out.string() << "\n";
        } else if (cmd_cf->parsed()) {
            run_counterfactual(cfg, out, ov);
            std::cout << "wrote counterfactual report to " << out.string() << "\n";
        } else if (cmd_repro->parsed()) {
            bool all_pass = false;
            std::cout << run_reproduce(cfg, out, ov, &all_pass);
            std::cout << "report written to " << out.string() << "\n";
            if (!all_pass) return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

} // namespace platsim

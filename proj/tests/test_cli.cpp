// End-to-end command tests: argument parsing, report/table/chart emission,
// override plumbing, exit codes, and byte-stable reruns.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <platsim/platsim.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace platsim;
using doctest::Contains;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() /
               ("platsim_cli_" + std::to_string(std::uniform_int_distribution<unsigned>()(rd)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// The CLI narrates to stdout/stderr; keep test output readable.
struct Silence {
    std::streambuf* out;
    std::streambuf* err;
    std::ostringstream sink;
    Silence() : out(std::cout.rdbuf(sink.rdbuf())), err(std::cerr.rdbuf(sink.rdbuf())) {}
    ~Silence() {
        std::cout.rdbuf(out);
        std::cerr.rdbuf(err);
    }
};

int cli(std::vector<std::string> args, std::string* captured = nullptr) {
    Silence s;
    const int rc = run_cli(std::move(args));
    if (captured) *captured = s.sink.str();
    return rc;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

const char* kS1Simulate = R"({
  "scenario": {
    "kind": "stylized",
    "partition_a": [0, 1, 2, 3],
    "partition_b": [4, 5, 6, 7],
    "liked": [0, 1, 2, 4, 5]
  },
  "user": {"mode": "naive"},
  "simulate": {"seed": 42, "seeds": 2, "horizon": 200, "snapshot_every": 50}
})";

const char* kS1Strategic = R"({
  "scenario": {
    "kind": "stylized",
    "partition_a": [0, 1, 2, 3],
    "partition_b": [4, 5, 6, 7],
    "liked": [0, 1, 2, 4, 5]
  },
  "user": {
    "mode": "strategic",
    "candidates": {"kind": "partition_masks",
                   "groups": [[0, 1, 2, 3], [4, 5, 6, 7]]}
  }
})";

Json read_json(const fs::path& p) { return Json::parse(read_file(p)); }

} // namespace

TEST_CASE("simulate writes trajectories, a summary table, and a report") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, kS1Simulate);

    CHECK(cli({"simulate", "--config", cfg.string(), "--out", out.string()}) == 0);

    CHECK(fs::exists(out / "trajectory_seed42.jsonl"));
    CHECK(fs::exists(out / "trajectory_seed43.jsonl"));
    CHECK(fs::exists(out / "summary.csv"));

    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["command"] == "simulate");
    CHECK(report["metadata"]["format_version"] == 1);
    CHECK(report["metadata"]["generator"] == std::string(kGeneratorName));
    CHECK_FALSE(report["metadata"].contains("overrides"));
    CHECK(report["target_models"] == Json::array({"clicks_all"}));
    REQUIRE(report["summaries"].size() == 2);
    CHECK(report["summaries"][0]["seed"] == 42);
    CHECK(report["summaries"][1]["seed"] == 43);
    CHECK(report["summaries"][0]["horizon"] == 200);

    const std::string csv = read_file(out / "summary.csv");
    CHECK(csv.rfind("seed,convergence_step,final_belief_clicks_a,final_belief_clicks_b,"
                    "final_belief_clicks_all,mean_u,mean_v\n", 0) == 0);

    // The emitted trajectory parses back to the independently simulated one.
    ExperimentConfig parsed = load_experiment_config(cfg);
    ResolvedScenario sc = resolve_scenario(parsed);
    Strategy greedy = naive_best_response(sc.game.user_payoff);
    SimConfig sim = parsed.sim;
    sim.seed = 42;
    Trajectory expect = simulate(sc.game, greedy, sim);
    Trajectory got = parse_trajectory_jsonl(read_file(out / "trajectory_seed42.jsonl"));
    REQUIRE(got.steps.size() == expect.steps.size());
    CHECK(got.steps.back().item == expect.steps.back().item);
    CHECK(got.final_belief[2] == expect.final_belief[2]);
}

TEST_CASE("reruns and parallel runs emit byte-identical artifacts") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    write_text(cfg, kS1Simulate);

    auto run_into = [&](const std::string& dir, const std::string& jobs) {
        const fs::path out = tmp.path / dir;
        REQUIRE(cli({"simulate", "--config", cfg.string(), "--out", out.string(), "--seeds", "4",
                     "--jobs", jobs}) == 0);
        return out;
    };
    const fs::path a = run_into("a", "1");
    const fs::path b = run_into("b", "1");
    const fs::path c = run_into("c", "4");

    for (const char* name : {"report.json", "summary.csv", "trajectory_seed42.jsonl",
                             "trajectory_seed43.jsonl", "trajectory_seed44.jsonl",
                             "trajectory_seed45.jsonl"}) {
        CAPTURE(name);
        const std::string ref = read_file(a / name);
        CHECK(read_file(b / name) == ref);
        CHECK(read_file(c / name) == ref);
    }
}

TEST_CASE("overrides change the run and are recorded in metadata") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, kS1Simulate);

    CHECK(cli({"simulate", "--config", cfg.string(), "--out", out.string(), "--seeds", "3"}) == 0);
    CHECK(fs::exists(out / "trajectory_seed44.jsonl"));
    CHECK_FALSE(fs::exists(out / "trajectory_seed45.jsonl"));
    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["overrides"]["seeds"] == 3);
    CHECK(report["summaries"].size() == 3);

    const fs::path out2 = tmp.path / "out2";
    CHECK(cli({"stable-set", "--config", cfg.string(), "--out", out2.string(), "--grid-k", "4",
               "--tau-dom", "1e-6"}) == 0);
    Json r2 = read_json(out2 / "report.json");
    CHECK(r2["stable_set"]["grid_resolution"] == 4);
    CHECK(r2["stable_set"]["margin_tolerance"] == 1e-6);
    CHECK(r2["metadata"]["overrides"]["grid_resolution"] == 4);
    CHECK(r2["metadata"]["overrides"]["margin_tolerance"] == 1e-6);

    std::string captured;
    CHECK(cli({"simulate", "--config", cfg.string(), "--out", (tmp.path / "x").string(),
               "--seeds", "0"}, &captured) == 2);
    CHECK(captured.find("--seeds must be >= 1") != std::string::npos);
}

TEST_CASE("stable-set reports the surviving models for both user modes") {
    TempDir tmp;
    const fs::path cfg_naive = tmp.path / "naive.json";
    const fs::path cfg_strat = tmp.path / "strat.json";
    write_text(cfg_naive, kS1Simulate);
    write_text(cfg_strat, kS1Strategic);

    const fs::path out_n = tmp.path / "n";
    CHECK(cli({"stable-set", "--config", cfg_naive.string(), "--out", out_n.string()}) == 0);
    Json rn = read_json(out_n / "report.json");
    CHECK(rn["metadata"]["command"] == "stable-set");
    CHECK(rn["user_mode"] == "naive");
    CHECK(rn["stable_set"]["survivors"] == Json::array({"clicks_all"}));
    const std::string csv = read_file(out_n / "stable_set.csv");
    CHECK(csv.rfind("kind,model,dominator,margin,round\n", 0) == 0);
    CHECK(csv.find("survivor,clicks_all") != std::string::npos);
    CHECK(csv.find("eliminated,clicks_a,clicks_all") != std::string::npos);

    const fs::path out_s = tmp.path / "s";
    CHECK(cli({"stable-set", "--config", cfg_strat.string(), "--out", out_s.string()}) == 0);
    Json rs = read_json(out_s / "report.json");
    CHECK(rs["user_mode"] == "strategic");
    CHECK(rs["stable_set"]["survivors"] == Json::array({"clicks_a"}));
    // The emitted strategy clicks the first half and ignores the second.
    CHECK(rs["user_strategy"][0][1] == 1.0);
    CHECK(rs["user_strategy"][4][1] == 0.0);
}

TEST_CASE("solve emits the max-min decision and candidate table") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, kS1Strategic);

    CHECK(cli({"solve", "--config", cfg.string(), "--out", out.string()}) == 0);
    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["command"] == "solve");
    CHECK(report["solution"]["value"].get<double>() ==
          doctest::Approx(0.7125).epsilon(1e-12));
    CHECK(report["solution"]["stable_set"]["survivors"] == Json::array({"clicks_a"}));
    CHECK(report["payoff_comparison"]["labels"] == Json::array({"strategic", "naive"}));
    CHECK(report["payoff_comparison"]["values"][0].get<double>() ==
          doctest::Approx(0.7125).epsilon(1e-12));
    CHECK(report["payoff_comparison"]["values"][1].get<double>() ==
          doctest::Approx(0.625).epsilon(1e-12));

    const std::string csv = read_file(out / "candidates.csv");
    CHECK(csv.rfind("id,worst_user_value,worst_platform_value,deviation_cost,survivors\n", 0) == 0);
    // One candidate per subset of the two groups; the full mask is the greedy.
    CHECK(report["solution"]["candidates"].size() == 4);
    CHECK(csv.find("clicks_a|clicks_b|clicks_all") == std::string::npos); // every mask pins someone
}

TEST_CASE("trust audits the strategization gap end to end") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, kS1Strategic);

    CHECK(cli({"trust", "--config", cfg.string(), "--out", out.string()}) == 0);
    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["command"] == "trust");
    CHECK(report["trust"]["strategic_value"].get<double>() ==
          doctest::Approx(0.7125).epsilon(1e-12));
    CHECK(report["trust"]["naive_value"].get<double>() ==
          doctest::Approx(0.625).epsilon(1e-12));
    CHECK(report["trust"]["strategization_gap"] == doctest::Approx(0.0875).epsilon(1e-12));
    CHECK(report["trust"]["trustworthy"] == false);

    const std::string csv = read_file(out / "trust.csv");
    CHECK(csv.rfind("strategic_value,naive_value,strategization_gap,kappa,kappa0,trustworthy\n",
                    0) == 0);
    CHECK(csv.find("false") != std::string::npos);
}

TEST_CASE("counterfactual audits predicted versus true payoff") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, R"({"scenario": {"kind": "toxicity_audit"}})");

    CHECK(cli({"counterfactual", "--config", cfg.string(), "--out", out.string()}) == 0);
    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["command"] == "counterfactual");
    const Json& cf = report["counterfactual"];
    CHECK(cf["predicted"].is_number());
    CHECK(cf["true_value"].is_number());
    CHECK(cf["gap"].get<double>() ==
          doctest::Approx(cf["true_value"].get<double>() - cf["predicted"].get<double>())
              .epsilon(1e-12));
    CHECK(cf["algorithm_shift"].get<double>() > 0.0);
    CHECK(fs::exists(out / "counterfactual.csv"));

    // A stylized config without any counterfactual rule is a config error.
    const fs::path cfg2 = tmp.path / "plain.json";
    write_text(cfg2, kS1Simulate);
    std::string captured;
    CHECK(cli({"counterfactual", "--config", cfg2.string(), "--out", out.string()}, &captured) ==
          2);
    CHECK(captured.find("names no counterfactual algorithm") != std::string::npos);
}

TEST_CASE("reproduce runs studies, prints a table, and signals failure") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, R"({
      "scenario": {"kind": "stylized", "partition_a": [0, 1, 2, 3],
                   "partition_b": [4, 5, 6, 7], "liked": [0, 1, 2, 4, 5]},
      "reproduce": {"studies": [2, 3], "seeds": 5}
    })");

    std::string table;
    CHECK(cli({"reproduce", "--config", cfg.string(), "--out", out.string(), "--jobs", "2"},
              &table) == 0);
    CHECK(table.find("2 strategization_value") != std::string::npos);
    CHECK(table.find("3 platform_alignment") != std::string::npos);
    CHECK(table.find("FAIL") == std::string::npos);

    Json report = read_json(out / "report.json");
    CHECK(report["metadata"]["command"] == "reproduce");
    CHECK(report["all_pass"] == true);
    REQUIRE(report["studies"].size() == 2);
    CHECK(report["studies"][0]["pass"] == true);
    CHECK(report["payoff_comparison"]["values"][0].get<double>() ==
          doctest::Approx(0.7125).epsilon(1e-12));

    const std::string csv = read_file(out / "reproduce.csv");
    CHECK(csv.rfind("study_id,study,check,analytic,computed,delta,tolerance,pass\n", 0) == 0);
    CHECK(csv.find(",false") == std::string::npos);

    // An impossible dominance budget makes the study fail and the exit code 1.
    const fs::path cfg_bad = tmp.path / "bad.json";
    write_text(cfg_bad, R"({
      "scenario": {"kind": "stylized", "partition_a": [0, 1, 2, 3],
                   "partition_b": [4, 5, 6, 7], "liked": [0, 1, 2, 4, 5]},
      "dominance": {"max_grid_points": 2},
      "reproduce": {"studies": [2]}
    })");
    std::string table_bad;
    CHECK(cli({"reproduce", "--config", cfg_bad.string(), "--out", (tmp.path / "bad_out").string()},
              &table_bad) == 1);
    CHECK(table_bad.find("FAIL") != std::string::npos);
    Json bad = read_json(tmp.path / "bad_out" / "report.json");
    CHECK(bad["all_pass"] == false);
    CHECK(bad["studies"][0].contains("error"));
}

TEST_CASE("charts renders SVGs from trajectories and payoff comparisons") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out = tmp.path / "out";
    write_text(cfg, kS1Simulate);

    REQUIRE(cli({"simulate", "--config", cfg.string(), "--out", out.string()}) == 0);
    CHECK(cli({"charts", "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "belief_trajectories.svg"));
    CHECK(fs::exists(out / "belief_trajectories.csv"));
    const std::string svg = read_file(out / "belief_trajectories.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("clicks_all") != std::string::npos);

    const fs::path out_t = tmp.path / "trust";
    const fs::path cfg_t = tmp.path / "strat.json";
    write_text(cfg_t, kS1Strategic);
    REQUIRE(cli({"trust", "--config", cfg_t.string(), "--out", out_t.string()}) == 0);
    CHECK(cli({"charts", "--out", out_t.string()}) == 0);
    CHECK(fs::exists(out_t / "payoff_comparison.svg"));
    const std::string bars = read_file(out_t / "payoff_comparison.csv");
    CHECK(bars.find("strategic,0.71") != std::string::npos);
    CHECK(bars.find("naive,0.625") != std::string::npos);

    // Nothing to chart is an error, not a silent no-op.
    std::string captured;
    CHECK(cli({"charts", "--out", (tmp.path / "empty").string()}, &captured) == 1);
    CHECK(captured.find("no trajectory files or report.json") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage, config, and runtime failures") {
    TempDir tmp;
    std::string captured;

    // No subcommand at all: CLI11 usage failure.
    CHECK(cli({}, &captured) != 0);

    // Missing --config on a command that requires one.
    CHECK(cli({"solve"}, &captured) != 0);

    // Unreadable config path: config error.
    CHECK(cli({"solve", "--config", (tmp.path / "nope.json").string(), "--out",
               (tmp.path / "o").string()}, &captured) == 2);
    CHECK(captured.find("cannot open config file") != std::string::npos);

    // Malformed config contents: config error.
    const fs::path broken = tmp.path / "broken.json";
    write_text(broken, "{\"scenario\": {\"kind\": \"stylized\"}}");
    CHECK(cli({"stable-set", "--config", broken.string(), "--out", (tmp.path / "o").string()},
              &captured) == 2);
}

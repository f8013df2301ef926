#pragma once

// Experiment configuration and persistence: strict JSON config parsing
// (unknown keys are errors, reported with their dotted path), JSON
// serialization of every report type, line-delimited trajectory files,
// 17-significant-digit CSV tables, atomic file writes, and the FNV-1a
// config hash embedded in report metadata.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "instance.hpp"
#include "scenarios.hpp"
#include "simulate.hpp"
#include "stability.hpp"
#include "strategize.hpp"
#include "trust.hpp"

namespace platsim {

using Json = nlohmann::json;

// ------------------------------------------------------------ small helpers

namespace detail {

inline std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void check_keys(const Json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) +
                          "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown key '" + join_path(path, it.key()) + "'");
    }
}

inline const Json* find(const Json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double as_number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("'" + where + "' must be a number");
    return j.get<double>();
}

inline int as_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError("'" + where + "' must be an integer");
    return j.get<int>();
}

inline std::uint64_t as_u64(const Json& j, const std::string& where) {
    if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)))
        throw ConfigError("'" + where + "' must be a non-negative integer");
    return j.get<std::uint64_t>();
}

inline bool as_bool(const Json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError("'" + where + "' must be a boolean");
    return j.get<bool>();
}

inline std::string as_string(const Json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError("'" + where + "' must be a string");
    return j.get<std::string>();
}

inline Vec as_vec(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of numbers");
    Vec v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

inline Mat as_mat(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of rows");
    Mat m;
    for (size_t i = 0; i < j.size(); ++i)
        m.push_back(as_vec(j[i], where + "[" + std::to_string(i) + "]"));
    return m;
}

inline std::vector<int> as_int_vec(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of integers");
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(as_int(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

inline std::vector<std::string> as_string_vec(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of strings");
    std::vector<std::string> v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

} // namespace detail

/// Finite doubles serialize as JSON numbers; non-finite values as the
/// strings "inf", "-inf", "nan" (JSON has no encoding for them).
inline Json json_num(double x) {
    if (std::isfinite(x)) return x;
    if (x > 0) return "inf";
    if (x < 0) return "-inf";
    return "nan";
}

/// `%.17g` rendering: enough digits that parsing the text recovers the
/// exact double, so CSV diffs are byte-meaningful.
inline std::string g17(double x) {
    if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// --------------------------------------------------------------- config hash

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Hash of the canonical (sorted-key) dump of a config document.
inline std::string config_hash(const Json& config) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

// ----------------------------------------------------------- experiment config

/// Parsed and validated experiment configuration. `canonical` holds the
/// original document for hashing and report embedding.
struct ExperimentConfig {
    Json canonical;

    std::string scenario_kind; // stylized | toxicity_audit | expanded_class | explicit
    std::optional<StylizedParams> stylized;
    double alpha = 0.01;          // toxicity_audit
    double eta = 0.5;             // expanded_class
    std::string phase = "after";  // expanded_class: "before" | "after"
    std::optional<GameInstance> explicit_game;

    UserParams user;
    DominanceParams dominance;
    SimConfig sim;
    std::vector<std::uint64_t> seeds; // resolved seed list (>= 1 entry)
    ConvergenceSpec convergence;
    double kappa0 = 0.0;
    std::optional<Json> counterfactual_algorithm; // unresolved algorithm spec

    std::vector<int> studies = {1, 2, 3, 4, 5};
    bool sensitivity_sweep = false;
    int reproduce_seeds = 20;
    int reproduce_horizon = 5000;
};

namespace detail {

inline ProposerPtr parse_algorithm(const Json& j, const std::string& path) {
    check_keys(j, path, {"kind", "explore", "engage_behavior", "feeds", "base", "weights"});
    const Json* kind_node = find(j, "kind");
    if (!kind_node) throw ConfigError("'" + join_path(path, "kind") + "' is required");
    const std::string kind = as_string(*kind_node, join_path(path, "kind"));

    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (find(j, k))
                throw ConfigError("unknown key '" + join_path(path, k) + "' for algorithm kind '" +
                                  kind + "'");
    };

    if (kind == "uniform") {
        forbid({"explore", "engage_behavior", "feeds", "base", "weights"});
        return std::make_shared<UniformProposer>();
    }
    if (kind == "engagement") {
        forbid({"feeds", "base", "weights"});
        double explore = 0.1;
        int engage = 1;
        if (const Json* n = find(j, "explore")) explore = as_number(*n, join_path(path, "explore"));
        if (const Json* n = find(j, "engage_behavior"))
            engage = as_int(*n, join_path(path, "engage_behavior"));
        return std::make_shared<EngagementProportionalProposer>(explore, engage);
    }
    if (kind == "tabular") {
        forbid({"explore", "engage_behavior", "base", "weights"});
        const Json* feeds = find(j, "feeds");
        if (!feeds) throw ConfigError("'" + join_path(path, "feeds") + "' is required");
        Mat rows = as_mat(*feeds, join_path(path, "feeds"));
        std::vector<Distribution> dists;
        for (auto& r : rows) dists.emplace_back(std::move(r));
        return std::make_shared<TabularProposer>(std::move(dists));
    }
    if (kind == "reweighted") {
        forbid({"explore", "engage_behavior", "feeds"});
        const Json* base = find(j, "base");
        const Json* weights = find(j, "weights");
        if (!base) throw ConfigError("'" + join_path(path, "base") + "' is required");
        if (!weights) throw ConfigError("'" + join_path(path, "weights") + "' is required");
        return std::make_shared<ReweightedProposer>(parse_algorithm(*base, join_path(path, "base")),
                                                    as_vec(*weights, join_path(path, "weights")));
    }
    throw ConfigError("'" + join_path(path, "kind") + "': unknown algorithm kind '" + kind + "'");
}

inline PayoffMatrix parse_payoff(const Json& j, const std::string& path) {
    check_keys(j, path, {"rows", "lo", "hi"});
    const Json* rows = find(j, "rows");
    const Json* lo = find(j, "lo");
    const Json* hi = find(j, "hi");
    if (!rows || !lo || !hi)
        throw ConfigError("'" + path + "' requires keys rows, lo, hi");
    return PayoffMatrix(as_mat(*rows, join_path(path, "rows")),
                        as_number(*lo, join_path(path, "lo")),
                        as_number(*hi, join_path(path, "hi")));
}

inline GameInstance parse_explicit_game(const Json& j, const std::string& path) {
    check_keys(j, path,
               {"kind", "items", "behaviors", "item_labels", "behavior_labels", "user_payoff",
                "platform_payoff", "models", "initial_belief", "lambda", "algorithm"});
    auto require = [&](const char* k) -> const Json& {
        const Json* n = find(j, k);
        if (!n) throw ConfigError("'" + join_path(path, k) + "' is required");
        return *n;
    };
    const int items = as_int(require("items"), join_path(path, "items"));
    const int behaviors = as_int(require("behaviors"), join_path(path, "behaviors"));
    std::vector<std::string> item_labels, behavior_labels;
    if (const Json* n = find(j, "item_labels"))
        item_labels = as_string_vec(*n, join_path(path, "item_labels"));
    if (const Json* n = find(j, "behavior_labels"))
        behavior_labels = as_string_vec(*n, join_path(path, "behavior_labels"));

    GameInstance g;
    g.spaces = Spaces(items, behaviors, std::move(item_labels), std::move(behavior_labels));
    g.user_payoff = parse_payoff(require("user_payoff"), join_path(path, "user_payoff"));
    g.platform_payoff = parse_payoff(require("platform_payoff"), join_path(path, "platform_payoff"));

    const Json& models_node = require("models");
    if (!models_node.is_array() || models_node.empty())
        throw ConfigError("'" + join_path(path, "models") + "' must be a non-empty array");
    std::vector<Strategy> models;
    std::vector<std::string> names;
    for (size_t i = 0; i < models_node.size(); ++i) {
        const std::string mpath = join_path(path, "models[" + std::to_string(i) + "]");
        check_keys(models_node[i], mpath, {"name", "rows"});
        const Json* rows = find(models_node[i], "rows");
        if (!rows) throw ConfigError("'" + join_path(mpath, "rows") + "' is required");
        models.emplace_back(as_mat(*rows, join_path(mpath, "rows")));
        const Json* name = find(models_node[i], "name");
        names.push_back(name ? as_string(*name, join_path(mpath, "name"))
                             : "m" + std::to_string(i));
    }
    g.models = ModelClass(std::move(models), std::move(names));

    if (const Json* n = find(j, "initial_belief"))
        g.initial_belief = Belief(as_vec(*n, join_path(path, "initial_belief")));
    else
        g.initial_belief = Belief::uniform(g.models.size());
    if (const Json* n = find(j, "lambda")) g.lambda = as_number(*n, join_path(path, "lambda"));
    g.algorithm = parse_algorithm(require("algorithm"), join_path(path, "algorithm"));
    validate_instance(g);
    return g;
}

inline CandidateSpec parse_candidates(const Json& j, const std::string& path) {
    check_keys(j, path,
               {"kind", "mask_cap", "opt_out", "groups", "strategies", "refine_resolution",
                "size_guard"});
    CandidateSpec spec;
    std::string kind = "all_support_masks";
    if (const Json* n = find(j, "kind")) kind = as_string(*n, join_path(path, "kind"));
    if (kind == "all_support_masks") spec.kind = CandidateSpec::Kind::AllSupportMasks;
    else if (kind == "partition_masks") spec.kind = CandidateSpec::Kind::PartitionMasks;
    else if (kind == "explicit") spec.kind = CandidateSpec::Kind::Explicit;
    else if (kind == "grid_refine") spec.kind = CandidateSpec::Kind::GridRefine;
    else throw ConfigError("'" + join_path(path, "kind") + "': unknown candidate kind '" + kind + "'");

    if (const Json* n = find(j, "mask_cap")) spec.mask_cap = as_int(*n, join_path(path, "mask_cap"));
    if (const Json* n = find(j, "opt_out")) spec.opt_out = as_int(*n, join_path(path, "opt_out"));
    if (const Json* n = find(j, "groups")) {
        if (!n->is_array()) throw ConfigError("'" + join_path(path, "groups") + "' must be an array");
        for (size_t i = 0; i < n->size(); ++i)
            spec.groups.push_back(
                as_int_vec((*n)[i], join_path(path, "groups[" + std::to_string(i) + "]")));
    }
    if (const Json* n = find(j, "strategies")) {
        if (!n->is_array())
            throw ConfigError("'" + join_path(path, "strategies") + "' must be an array");
        for (size_t i = 0; i < n->size(); ++i)
            spec.strategies.emplace_back(
                as_mat((*n)[i], join_path(path, "strategies[" + std::to_string(i) + "]")));
    }
    if (const Json* n = find(j, "refine_resolution"))
        spec.refine_resolution = as_int(*n, join_path(path, "refine_resolution"));
    if (const Json* n = find(j, "size_guard"))
        spec.size_guard = as_u64(*n, join_path(path, "size_guard"));
    return spec;
}

} // namespace detail

/// Parse and validate a full experiment config document. Unknown keys
/// anywhere are errors naming the offending dotted path.
inline ExperimentConfig parse_experiment_config(const Json& doc) {
    using namespace detail;
    ExperimentConfig cfg;
    cfg.canonical = doc;
    check_keys(doc, "",
               {"scenario", "user", "dominance", "simulate", "trust", "counterfactual",
                "reproduce"});

    const Json* scen = find(doc, "scenario");
    if (!scen) throw ConfigError("'scenario' is required");
    {
        const Json* kind_node = find(*scen, "kind");
        if (!kind_node) throw ConfigError("'scenario.kind' is required");
        cfg.scenario_kind = as_string(*kind_node, "scenario.kind");
        if (cfg.scenario_kind == "stylized") {
            check_keys(*scen, "scenario",
                       {"kind", "partition_a", "partition_b", "liked", "gamma", "explore",
                        "lambda"});
            StylizedParams p;
            auto require = [&](const char* k) -> const Json& {
                const Json* n = find(*scen, k);
                if (!n) throw ConfigError("'scenario." + std::string(k) + "' is required");
                return *n;
            };
            p.partition_a = as_int_vec(require("partition_a"), "scenario.partition_a");
            p.partition_b = as_int_vec(require("partition_b"), "scenario.partition_b");
            p.liked = as_int_vec(require("liked"), "scenario.liked");
            if (const Json* n = find(*scen, "gamma")) p.gamma = as_number(*n, "scenario.gamma");
            if (const Json* n = find(*scen, "explore"))
                p.explore = as_number(*n, "scenario.explore");
            if (const Json* n = find(*scen, "lambda")) p.lambda = as_number(*n, "scenario.lambda");
            cfg.stylized = std::move(p);
        } else if (cfg.scenario_kind == "toxicity_audit") {
            check_keys(*scen, "scenario", {"kind", "alpha"});
            if (const Json* n = find(*scen, "alpha")) cfg.alpha = as_number(*n, "scenario.alpha");
        } else if (cfg.scenario_kind == "expanded_class") {
            check_keys(*scen, "scenario", {"kind", "eta", "phase"});
            if (const Json* n = find(*scen, "eta")) cfg.eta = as_number(*n, "scenario.eta");
            if (const Json* n = find(*scen, "phase")) {
                cfg.phase = as_string(*n, "scenario.phase");
                if (cfg.phase != "before" && cfg.phase != "after")
                    throw ConfigError("'scenario.phase' must be \"before\" or \"after\"");
            }
        } else if (cfg.scenario_kind == "explicit") {
            cfg.explicit_game = parse_explicit_game(*scen, "scenario");
        } else {
            throw ConfigError("'scenario.kind': unknown scenario '" + cfg.scenario_kind + "'");
        }
    }

    if (const Json* user = find(doc, "user")) {
        check_keys(*user, "user", {"mode", "candidates"});
        if (const Json* n = find(*user, "mode")) {
            const std::string mode = as_string(*n, "user.mode");
            if (mode == "naive") cfg.user.mode = UserParams::Mode::Naive;
            else if (mode == "strategic") cfg.user.mode = UserParams::Mode::Strategic;
            else throw ConfigError("'user.mode' must be \"naive\" or \"strategic\"");
        }
        if (const Json* n = find(*user, "candidates"))
            cfg.user.candidates = parse_candidates(*n, "user.candidates");
    }

    if (const Json* dom = find(doc, "dominance")) {
        check_keys(*dom, "dominance",
                   {"grid_resolution", "margin_tolerance", "max_grid_points", "max_rounds"});
        if (const Json* n = find(*dom, "grid_resolution"))
            cfg.dominance.grid_resolution = as_int(*n, "dominance.grid_resolution");
        if (const Json* n = find(*dom, "margin_tolerance"))
            cfg.dominance.margin_tolerance = as_number(*n, "dominance.margin_tolerance");
        if (const Json* n = find(*dom, "max_grid_points"))
            cfg.dominance.max_grid_points = as_u64(*n, "dominance.max_grid_points");
        if (const Json* n = find(*dom, "max_rounds"))
            cfg.dominance.max_rounds = as_int(*n, "dominance.max_rounds");
    }

    if (const Json* sim = find(doc, "simulate")) {
        check_keys(*sim, "simulate",
                   {"seed", "seeds", "horizon", "snapshot_every", "belief_floor", "convergence"});
        if (const Json* n = find(*sim, "seed")) cfg.sim.seed = as_u64(*n, "simulate.seed");
        if (const Json* n = find(*sim, "horizon"))
            cfg.sim.horizon = as_int(*n, "simulate.horizon");
        if (const Json* n = find(*sim, "snapshot_every"))
            cfg.sim.snapshot_every = as_int(*n, "simulate.snapshot_every");
        if (const Json* n = find(*sim, "belief_floor"))
            cfg.sim.belief_floor = as_number(*n, "simulate.belief_floor");
        if (const Json* n = find(*sim, "convergence")) {
            check_keys(*n, "simulate.convergence", {"threshold", "hold_snapshots"});
            if (const Json* t = find(*n, "threshold"))
                cfg.convergence.threshold = as_number(*t, "simulate.convergence.threshold");
            if (const Json* h = find(*n, "hold_snapshots"))
                cfg.convergence.hold_snapshots = as_int(*h, "simulate.convergence.hold_snapshots");
        }
        if (const Json* n = find(*sim, "seeds")) {
            if (n->is_array()) {
                for (size_t i = 0; i < n->size(); ++i)
                    cfg.seeds.push_back(as_u64((*n)[i], "simulate.seeds[" + std::to_string(i) + "]"));
                if (cfg.seeds.empty())
                    throw ConfigError("'simulate.seeds' must be non-empty");
            } else {
                const int count = as_int(*n, "simulate.seeds");
                if (count < 1) throw ConfigError("'simulate.seeds' must be >= 1");
                for (int i = 0; i < count; ++i)
                    cfg.seeds.push_back(cfg.sim.seed + static_cast<std::uint64_t>(i));
            }
        }
    }
    if (cfg.seeds.empty()) cfg.seeds.push_back(cfg.sim.seed);

    if (const Json* trust = find(doc, "trust")) {
        check_keys(*trust, "trust", {"kappa0"});
        if (const Json* n = find(*trust, "kappa0")) cfg.kappa0 = as_number(*n, "trust.kappa0");
    }

    if (const Json* cf = find(doc, "counterfactual")) {
        check_keys(*cf, "counterfactual", {"algorithm"});
        if (const Json* n = find(*cf, "algorithm")) {
            detail::parse_algorithm(*n, "counterfactual.algorithm"); // validate shape now
            cfg.counterfactual_algorithm = *n;
        }
    }

    if (const Json* rep = find(doc, "reproduce")) {
        check_keys(*rep, "reproduce", {"studies", "sensitivity_sweep", "seeds", "horizon"});
        if (const Json* n = find(*rep, "studies")) {
            if (!n->is_array() || n->empty())
                throw ConfigError("'reproduce.studies' must be a non-empty array");
            cfg.studies.clear();
            for (size_t i = 0; i < n->size(); ++i) {
                const std::string where = "reproduce.studies[" + std::to_string(i) + "]";
                int id = 0;
                if ((*n)[i].is_string()) id = reproduction_study_id(as_string((*n)[i], where));
                else id = as_int((*n)[i], where);
                if (id < 1 || id > 5)
                    throw ConfigError("'" + where + "' must name a study or give an id in 1..5");
                cfg.studies.push_back(id);
            }
        }
        if (const Json* n = find(*rep, "sensitivity_sweep"))
            cfg.sensitivity_sweep = as_bool(*n, "reproduce.sensitivity_sweep");
        if (const Json* n = find(*rep, "seeds")) {
            cfg.reproduce_seeds = as_int(*n, "reproduce.seeds");
            if (cfg.reproduce_seeds < 1) throw ConfigError("'reproduce.seeds' must be >= 1");
        }
        if (const Json* n = find(*rep, "horizon")) {
            cfg.reproduce_horizon = as_int(*n, "reproduce.horizon");
            if (cfg.reproduce_horizon < 1) throw ConfigError("'reproduce.horizon' must be >= 1");
        }
    }
    return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    return parse_experiment_config(doc);
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

// --------------------------------------------------------- scenario resolution

/// A config's scenario turned into live engine objects.
struct ResolvedScenario {
    GameInstance game;
    std::optional<StylizedInstance> stylized;
    std::optional<ToxicityAuditSetup> toxicity;
    std::optional<ExpandedClassSetup> expanded;
    ProposerPtr counterfactual; // null when the config names none
};

inline ResolvedScenario resolve_scenario(const ExperimentConfig& cfg) {
    ResolvedScenario r;
    if (cfg.scenario_kind == "stylized") {
        r.stylized = make_stylized(*cfg.stylized);
        r.game = r.stylized->game;
    } else if (cfg.scenario_kind == "toxicity_audit") {
        r.toxicity = make_toxicity_audit_instance(cfg.alpha);
        r.stylized = r.toxicity->stylized;
        r.game = r.toxicity->stylized.game;
        r.counterfactual = r.toxicity->counterfactual;
    } else if (cfg.scenario_kind == "expanded_class") {
        r.expanded = make_expanded_class_instance(cfg.eta);
        r.game = cfg.phase == "before" ? r.expanded->before.game : r.expanded->after;
        if (cfg.phase == "before") r.stylized = r.expanded->before;
    } else {
        r.game = *cfg.explicit_game;
    }
    if (cfg.counterfactual_algorithm)
        r.counterfactual =
            detail::parse_algorithm(*cfg.counterfactual_algorithm, "counterfactual.algorithm");
    return r;
}

// ------------------------------------------------------------- serialization

inline Json belief_json(const Belief& b) {
    Json a = Json::array();
    for (int i = 0; i < b.size(); ++i) a.push_back(b[i]);
    return a;
}

inline Json strategy_json(const Strategy& s) {
    Json rows = Json::array();
    for (int z = 0; z < s.items(); ++z) {
        Json row = Json::array();
        for (int b = 0; b < s.behaviors(); ++b) row.push_back(s.prob(z, b));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json stable_set_json(const StableSetResult& r, const ModelClass& models) {
    Json j;
    Json survivors = Json::array();
    for (int i : r.survivors) survivors.push_back(models.names[static_cast<size_t>(i)]);
    j["survivors"] = std::move(survivors);
    j["survivor_indices"] = r.survivors;
    Json elim = Json::array();
    for (const auto& e : r.eliminated) {
        Json row;
        row["model"] = models.names[static_cast<size_t>(e.model)];
        row["dominator"] = models.names[static_cast<size_t>(e.dominator)];
        row["margin"] = json_num(e.margin);
        row["round"] = e.round;
        elim.push_back(std::move(row));
    }
    j["eliminated"] = std::move(elim);
    j["rounds"] = r.rounds;
    j["grid_resolution"] = r.grid_resolution;
    j["margin_tolerance"] = r.margin_tolerance;
    return j;
}

inline Json solve_json(const SolveResult& r, const GameInstance& g) {
    Json j;
    j["best_id"] = r.best_id;
    j["best_strategy"] = strategy_json(r.best);
    j["value"] = json_num(r.value);
    j["worst_platform_value"] = json_num(r.worst_platform_value);
    j["stable_set"] = stable_set_json(r.stable, g.models);
    j["worst_belief"] = belief_json(r.worst_belief);
    Json outcomes = Json::array();
    for (const auto& o : r.outcomes) {
        Json row;
        row["id"] = o.id;
        row["worst_user_value"] = json_num(o.worst_user_value);
        row["worst_platform_value"] = json_num(o.worst_platform_value);
        row["deviation_cost"] = json_num(o.deviation_cost);
        row["survivors"] = o.survivors;
        outcomes.push_back(std::move(row));
    }
    j["candidates"] = std::move(outcomes);
    return j;
}

inline Json trust_json(const TrustReport& r, const GameInstance& g) {
    Json j;
    j["strategic_value"] = json_num(r.strategic_value);
    j["naive_value"] = json_num(r.naive_value);
    j["strategization_gap"] = json_num(r.strategization_gap);
    j["kappa"] = json_num(r.kappa);
    j["kappa0"] = json_num(r.kappa0);
    j["trustworthy"] = r.trustworthy;
    j["strategic"] = solve_json(r.strategic, g);
    j["naive_stable"] = stable_set_json(r.naive_stable, g.models);
    return j;
}

inline Json counterfactual_json(const CounterfactualReport& r) {
    Json j;
    j["predicted"] = json_num(r.predicted);
    j["true_value"] = json_num(r.true_value);
    j["gap"] = json_num(r.gap);
    j["algorithm_shift"] = json_num(r.algorithm_shift);
    j["beliefs_used"] = r.beliefs_used;
    Json verts = Json::array();
    for (const auto& v : r.vertices) verts.push_back(v);
    j["vertices"] = std::move(verts);
    Json preds = Json::array();
    for (double p : r.predicted_at_vertices) preds.push_back(json_num(p));
    j["predicted_at_vertices"] = std::move(preds);
    j["best_vertex"] = r.best_vertex;
    return j;
}

inline Json study_json(const StudyReport& r) {
    Json j;
    j["id"] = r.id;
    j["study"] = r.study;
    j["pass"] = r.pass;
    if (!r.error.empty()) j["error"] = r.error;
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json row;
        row["name"] = c.name;
        row["analytic"] = json_num(c.analytic);
        row["computed"] = json_num(c.computed);
        row["delta"] = json_num(c.delta);
        row["tolerance"] = json_num(c.tolerance);
        row["pass"] = c.pass;
        checks.push_back(std::move(row));
    }
    j["checks"] = std::move(checks);
    return j;
}

/// Report metadata block shared by every command's JSON output.
inline Json report_metadata(const ExperimentConfig& cfg) {
    Json m;
    m["config"] = cfg.canonical;
    m["config_hash"] = config_hash(cfg.canonical);
    m["generator"] = kGeneratorName;
    m["format_version"] = 1;
    return m;
}

// ------------------------------------------------------- trajectory files

/// Line-delimited trajectory: a header line, then step and snapshot records
/// in time order.
inline std::string trajectory_jsonl(const Trajectory& traj, const ModelClass& models) {
    std::ostringstream out;
    Json header;
    header["type"] = "header";
    header["seed"] = traj.seed;
    header["generator"] = traj.generator;
    header["models"] = models.names;
    header["horizon"] = traj.steps.size();
    out << header.dump() << "\n";
    size_t snap = 0;
    auto emit_snaps_before = [&](int t) {
        while (snap < traj.snapshots.size() && traj.snapshots[snap].t <= t) {
            Json s;
            s["type"] = "snapshot";
            s["t"] = traj.snapshots[snap].t;
            s["belief"] = belief_json(traj.snapshots[snap].belief);
            out << s.dump() << "\n";
            ++snap;
        }
    };
    for (const auto& step : traj.steps) {
        emit_snaps_before(step.t);
        Json s;
        s["type"] = "step";
        s["t"] = step.t;
        s["item"] = step.item;
        s["behavior"] = step.behavior;
        s["u"] = step.user_payoff;
        s["v"] = step.platform_payoff;
        out << s.dump() << "\n";
    }
    emit_snaps_before(std::numeric_limits<int>::max());
    return out.str();
}

inline Trajectory parse_trajectory_jsonl(const std::string& text) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ConfigError(std::string("trajectory parse error: ") + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "header") {
            traj.seed = j.at("seed").get<std::uint64_t>();
            traj.generator = j.value("generator", "");
            saw_header = true;
        } else if (type == "step") {
            traj.steps.push_back({j.at("t").get<int>(), j.at("item").get<int>(),
                                  j.at("behavior").get<int>(), j.at("u").get<double>(),
                                  j.at("v").get<double>()});
        } else if (type == "snapshot") {
            traj.snapshots.push_back({j.at("t").get<int>(), Belief(j.at("belief").get<Vec>())});
        } else {
            throw ConfigError("trajectory record has unknown type '" + type + "'");
        }
    }
    if (!saw_header) throw ConfigError("trajectory file has no header record");
    if (!traj.snapshots.empty()) traj.final_belief = traj.snapshots.back().belief;
    return traj;
}

// ----------------------------------------------------------------- CSV + files

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::ostringstream out;
        auto emit = [&](const std::vector<std::string>& cells) {
            for (size_t i = 0; i < cells.size(); ++i) {
                if (i) out << ",";
                bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
                if (!quote) {
                    out << cells[i];
                } else {
                    out << '"';
                    for (char c : cells[i]) {
                        if (c == '"') out << '"'; // RFC 4180: double embedded quotes
                        out << c;
                    }
                    out << '"';
                }
            }
            out << "\n";
        };
        emit(header);
        for (const auto& r : rows) emit(r);
        return out.str();
    }
};

/// Write via a temp file in the destination directory, then rename: readers
/// never observe partial content, and parallel jobs writing distinct files
/// do not interfere.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io: cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw Error("io: short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace platsim

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskrl/gridworld.hpp"
#include "riskrl/population.hpp"
#include "riskrl/valuation.hpp"

namespace riskrl {

/// Invalid experiment configuration. The message starts with the offending
/// field path or with the line and column of a syntax error.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConditionConfig {
    std::string name;
    PopulationConfig population;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::string output_dir;
    long series_stride = 1;
    std::vector<ConditionConfig> conditions;
    /// canonical form of the document the config was parsed from
    std::string canonical;
};

// *******************************************************
// Built-in presets
// *******************************************************

namespace presets {

inline constexpr const char* kFig2 = R"({
  "name": "fig2",
  "seed": 20170101,
  "population": {"agents": 5000, "steps": 5000},
  "grid": {
    "tasks": ["trade_off", "gambling", "risky_world", "lack_of_control"],
    "biases": ["realistic", "action_optimistic", "outcome_optimistic"]
  }
})";

inline constexpr const char* kFig3 = R"({
  "name": "fig3",
  "seed": 20170103,
  "population": {"agents": 5000, "steps": 5000},
  "conditions": [
    {"name": "gambling", "task": "gambling", "bias": "outcome_optimistic"},
    {"name": "second_distracter", "task": "second_distracter", "bias": "outcome_optimistic",
     "overrides": {"distracter_reward": 0.2}},
    {"name": "pre_gamble_punishment", "task": "pre_gamble_punishment", "bias": "outcome_optimistic",
     "overrides": {"pre_gamble_punishment": -0.1}},
    {"name": "high_stakes", "task": "high_stakes", "bias": "outcome_optimistic"}
  ]
})";

inline constexpr const char* kFig4 = R"({
  "name": "fig4",
  "seed": 20170104,
  "population": {"agents": 5000, "steps": 5000, "exp_temperature": 1.0},
  "conditions": [
    {"name": "gambling_exp_weighted", "task": "gambling", "bias": "exp_weighted"},
    {"name": "high_stakes_exp_weighted", "task": "high_stakes", "bias": "exp_weighted"},
    {"name": "high_stakes_action_optimistic", "task": "high_stakes", "bias": "action_optimistic"}
  ]
})";

inline constexpr const char* kDesk = R"({
  "name": "desk",
  "seed": 20170101,
  "population": {"agents": 500, "steps": 5000},
  "grid": {
    "tasks": ["trade_off", "gambling", "risky_world", "lack_of_control"],
    "biases": ["realistic", "action_optimistic", "outcome_optimistic"]
  }
})";

inline std::optional<std::string> find(const std::string& name) {
    static const std::map<std::string, const char*> table{
        {"fig2", kFig2}, {"fig3", kFig3}, {"fig4", kFig4}, {"desk", kDesk}};
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return std::string(it->second);
}

inline std::vector<std::string> names() { return {"desk", "fig2", "fig3", "fig4"}; }

}  // namespace presets

// *******************************************************
// Parsing
// *******************************************************

namespace detail {

using nlohmann::json;

inline std::string line_col(const std::string& text, std::size_t byte) {
    long line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

inline void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, _] : obj.items())
        if (!allowed.count(k)) fail(path + "." + k, "unknown field");
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline long get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

inline std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline Coord get_coord(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        fail(path, "expected a coordinate [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

inline PayoffSpec get_payoff(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty outcome table");
    PayoffSpec p;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        check_keys(j[i], at, {"label", "probability", "reward"});
        if (!j[i].contains("probability") || !j[i].contains("reward")) fail(at, "outcome needs probability and reward");
        Outcome o;
        o.label = j[i].contains("label") ? get_string(j[i]["label"], at + ".label") : std::to_string(i);
        o.probability = get_number(j[i]["probability"], at + ".probability");
        o.reward = get_number(j[i]["reward"], at + ".reward");
        p.outcomes.push_back(o);
    }
    try {
        p.validate();
    } catch (const TaskError& e) {
        fail(path, e.what());
    }
    return p;
}

inline TaskOverrides get_overrides(const json& j, const std::string& path) {
    check_keys(j, path, {"payoffs", "distracter_reward", "pre_gamble_punishment"});
    TaskOverrides o;
    if (j.contains("payoffs")) {
        check_keys(j["payoffs"], path + ".payoffs", {"A", "B", "C"});
        for (const auto& [k, v] : j["payoffs"].items()) o.payoffs[k] = get_payoff(v, path + ".payoffs." + k);
    }
    if (j.contains("distracter_reward"))
        o.distracter_reward = get_number(j["distracter_reward"], path + ".distracter_reward");
    if (j.contains("pre_gamble_punishment"))
        o.pre_gamble_punishment = get_number(j["pre_gamble_punishment"], path + ".pre_gamble_punishment");
    return o;
}

/// Custom task given as cells, goals and payoff tables.
inline TaskSpec get_custom_task(const json& j, const std::string& path) {
    check_keys(j, path,
               {"name", "cells", "goals", "payoffs", "start_cells", "forced_random_actions", "relocating_payoffs",
                "punishments"});
    TaskSpec t;
    t.name = j.contains("name") ? get_string(j["name"], path + ".name") : "custom";
    if (!j.contains("cells") || !j["cells"].is_array()) fail(path + ".cells", "expected a list of coordinates");
    for (std::size_t i = 0; i < j["cells"].size(); ++i)
        t.cells.push_back(get_coord(j["cells"][i], path + ".cells[" + std::to_string(i) + "]"));

    if (!j.contains("payoffs") || !j["payoffs"].is_object()) fail(path + ".payoffs", "expected option -> outcome table");
    for (const auto& [k, v] : j["payoffs"].items()) {
        if (k != "A" && k != "B" && k != "C") fail(path + ".payoffs." + k, "options must be A, B or C");
        t.payoffs.push_back({k, get_payoff(v, path + ".payoffs." + k)});
    }

    if (!j.contains("goals") || !j["goals"].is_array()) fail(path + ".goals", "expected a list of goals");
    for (std::size_t i = 0; i < j["goals"].size(); ++i) {
        const std::string at = path + ".goals[" + std::to_string(i) + "]";
        const auto& g = j["goals"][i];
        check_keys(g, at, {"cell", "option"});
        if (!g.contains("cell")) fail(at + ".cell", "missing");
        t.goal_slots.push_back(get_coord(g["cell"], at + ".cell"));
        if (!g.contains("option") || g["option"].is_null()) {
            t.initial_placement.push_back(-1);
        } else {
            const int p = t.payoff_index(get_string(g["option"], at + ".option"));
            if (p < 0) fail(at + ".option", "no payoff table for this option");
            t.initial_placement.push_back(p);
        }
    }
    if (j.contains("start_cells")) {
        for (std::size_t i = 0; i < j["start_cells"].size(); ++i)
            t.start_cells.push_back(get_coord(j["start_cells"][i], path + ".start_cells[" + std::to_string(i) + "]"));
    } else {
        t.start_cells = riskrl::detail::non_goal(t.cells, t.goal_slots);
    }
    if (j.contains("forced_random_actions")) {
        if (!j["forced_random_actions"].is_boolean()) fail(path + ".forced_random_actions", "expected true/false");
        t.forced_random_actions = j["forced_random_actions"].get<bool>();
    }
    if (j.contains("relocating_payoffs")) {
        if (!j["relocating_payoffs"].is_boolean()) fail(path + ".relocating_payoffs", "expected true/false");
        t.relocating_payoffs = j["relocating_payoffs"].get<bool>();
    }
    if (j.contains("punishments")) {
        for (std::size_t i = 0; i < j["punishments"].size(); ++i) {
            const std::string at = path + ".punishments[" + std::to_string(i) + "]";
            check_keys(j["punishments"][i], at, {"cell", "reward"});
            t.punishments.push_back({get_coord(j["punishments"][i]["cell"], at + ".cell"),
                                     get_number(j["punishments"][i]["reward"], at + ".reward")});
        }
    }
    try {
        t.finalize();
    } catch (const TaskError& e) {
        fail(path, e.what());
    }
    return t;
}

inline const std::set<std::string>& population_keys() {
    static const std::set<std::string> keys{"agents",         "steps",           "gamma_mean",     "gamma_std",
                                            "beta_mean",      "beta_std",        "init_value_mean", "init_value_std",
                                            "per_state_init", "exp_temperature", "fear_mode",      "bias_q"};
    return keys;
}

inline void apply_population(const json& j, const std::string& path, PopulationConfig& p) {
    check_keys(j, path, population_keys());
    if (j.contains("agents")) p.n_agents = get_integer(j["agents"], path + ".agents");
    if (j.contains("steps")) p.horizon = get_integer(j["steps"], path + ".steps");
    if (j.contains("gamma_mean")) p.gamma_mean = get_number(j["gamma_mean"], path + ".gamma_mean");
    if (j.contains("gamma_std")) p.gamma_std = get_number(j["gamma_std"], path + ".gamma_std");
    if (j.contains("beta_mean")) p.beta_mean = get_number(j["beta_mean"], path + ".beta_mean");
    if (j.contains("beta_std")) p.beta_std = get_number(j["beta_std"], path + ".beta_std");
    if (j.contains("init_value_mean")) p.init_value_mean = get_number(j["init_value_mean"], path + ".init_value_mean");
    if (j.contains("init_value_std")) p.init_value_std = get_number(j["init_value_std"], path + ".init_value_std");
    if (j.contains("per_state_init")) {
        if (!j["per_state_init"].is_boolean()) fail(path + ".per_state_init", "expected true/false");
        p.per_state_init = j["per_state_init"].get<bool>();
    }
    if (j.contains("exp_temperature")) p.exp_temperature = get_number(j["exp_temperature"], path + ".exp_temperature");
    if (j.contains("fear_mode")) {
        const auto m = get_string(j["fear_mode"], path + ".fear_mode");
        if (m == "signed") p.options.fear = FearMode::Signed;
        else if (m == "raw") p.options.fear = FearMode::Raw;
        else fail(path + ".fear_mode", "expected 'signed' or 'raw'");
    }
    if (j.contains("bias_q")) {
        const auto m = get_string(j["bias_q"], path + ".bias_q");
        if (m == "biased") p.options.selection = SelectionValues::Biased;
        else if (m == "unbiased") p.options.selection = SelectionValues::Unbiased;
        else fail(path + ".bias_q", "expected 'biased' or 'unbiased'");
    }
}

inline BiasMode get_bias(const json& j, const std::string& path) {
    const auto s = get_string(j, path);
    auto b = parse_bias(s);
    if (!b) fail(path, "unknown bias mode '" + s + "'");
    return *b;
}

inline TaskSpec get_task(const json& j, const TaskOverrides& overrides, const std::string& path) {
    if (j.is_object()) return get_custom_task(j, path);
    const auto id = get_string(j, path);
    try {
        return build_task(id, overrides);
    } catch (const TaskError& e) {
        fail(path, e.what());
    }
}

inline void check_population(const PopulationConfig& p, const std::string& path) {
    if (p.n_agents < 1) fail(path + ".agents", "must be at least 1");
    if (p.horizon < 1) fail(path + ".steps", "must be at least 1");
    if (p.gamma_std < 0.0) fail(path + ".gamma_std", "must be non-negative");
    if (p.beta_std < 0.0) fail(path + ".beta_std", "must be non-negative");
    if (p.init_value_std < 0.0) fail(path + ".init_value_std", "must be non-negative");
    if (!(p.exp_temperature > 0.0)) fail(path + ".exp_temperature", "must be positive");
}

}  // namespace detail

/// Parses an experiment document. Throws ConfigError on any problem.
inline ExperimentConfig parse_experiment(const std::string& text) {
    using detail::fail;
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": syntax error");
    }
    detail::check_keys(doc, "config",
                       {"name", "seed", "output_dir", "series_stride", "population", "conditions", "grid"});

    ExperimentConfig cfg;
    cfg.canonical = doc.dump();
    cfg.name = doc.contains("name") ? detail::get_string(doc["name"], "name") : "experiment";
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) cfg.output_dir = detail::get_string(doc["output_dir"], "output_dir");
    if (doc.contains("series_stride")) {
        cfg.series_stride = detail::get_integer(doc["series_stride"], "series_stride");
        if (cfg.series_stride < 1) fail("series_stride", "must be at least 1");
    }

    PopulationConfig base;
    if (doc.contains("population")) detail::apply_population(doc["population"], "population", base);
    base.master_seed = cfg.seed;

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        detail::check_keys(g, "grid", {"tasks", "biases"});
        if (!g.contains("tasks") || !g["tasks"].is_array()) fail("grid.tasks", "expected a list of task ids");
        if (!g.contains("biases") || !g["biases"].is_array()) fail("grid.biases", "expected a list of bias modes");
        for (std::size_t i = 0; i < g["tasks"].size(); ++i) {
            const std::string tpath = "grid.tasks[" + std::to_string(i) + "]";
            const auto task = detail::get_task(g["tasks"][i], {}, tpath);
            for (std::size_t k = 0; k < g["biases"].size(); ++k) {
                ConditionConfig c;
                c.population = base;
                c.population.task = task;
                c.population.bias = detail::get_bias(g["biases"][k], "grid.biases[" + std::to_string(k) + "]");
                c.name = task.name + "_" + std::string(bias_name(c.population.bias));
                cfg.conditions.push_back(std::move(c));
            }
        }
    }

    if (doc.contains("conditions")) {
        if (!doc["conditions"].is_array()) fail("conditions", "expected a list");
        for (std::size_t i = 0; i < doc["conditions"].size(); ++i) {
            const std::string path = "conditions[" + std::to_string(i) + "]";
            const auto& j = doc["conditions"][i];
            detail::check_keys(j, path, {"name", "task", "bias", "overrides", "population"});
            if (!j.contains("task")) fail(path + ".task", "missing");
            ConditionConfig c;
            c.population = base;
            TaskOverrides ov;
            if (j.contains("overrides")) ov = detail::get_overrides(j["overrides"], path + ".overrides");
            c.population.task = detail::get_task(j["task"], ov, path + ".task");
            if (j.contains("bias")) c.population.bias = detail::get_bias(j["bias"], path + ".bias");
            if (j.contains("population")) detail::apply_population(j["population"], path + ".population", c.population);
            c.name = j.contains("name") ? detail::get_string(j["name"], path + ".name")
                                        : c.population.task.name + "_" + std::string(bias_name(c.population.bias));
            detail::check_population(c.population, path + ".population");
            cfg.conditions.push_back(std::move(c));
        }
    }

    if (cfg.conditions.empty()) fail("config", "no conditions (give 'conditions' or 'grid')");
    detail::check_population(base, "population");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cfg.conditions.size(); ++i) {
        const auto& name = cfg.conditions[i].name;
        if (name.empty() || name.find_first_of(",/\\ \t\n") != std::string::npos)
            fail("conditions[" + std::to_string(i) + "].name", "'" + name + "' is not usable as a file name");
        if (!seen.insert(name).second) fail("conditions[" + std::to_string(i) + "].name", "duplicate name '" + name + "'");
    }
    return cfg;
}

/// Parses a document after applying top-level overrides to it, so the result
/// (and its canonical form) reflect the effective settings.
inline ExperimentConfig parse_experiment(const std::string& text, const nlohmann::json& overrides) {
    if (overrides.empty()) return parse_experiment(text);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": syntax error");
    }
    if (!doc.is_object()) throw ConfigError("config: expected an object");
    for (const auto& [k, v] : overrides.items()) {
        if (k == "population") {
            auto& pop = doc["population"];
            if (pop.is_null()) pop = nlohmann::json::object();
            for (const auto& [pk, pv] : v.items()) pop[pk] = pv;
            // per-condition population blocks must not undo command-line overrides
            if (doc.contains("conditions") && doc["conditions"].is_array())
                for (auto& c : doc["conditions"])
                    if (c.is_object() && c.contains("population") && c["population"].is_object())
                        for (const auto& [pk, pv] : v.items()) c["population"][pk] = pv;
        } else {
            doc[k] = v;
        }
    }
    return parse_experiment(doc.dump());
}

/// FNV-1a over the canonical document.
inline std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Reads a config file, or a built-in preset when `source` names one.
inline std::string load_config_text(const std::string& source) {
    if (auto p = presets::find(source)) return *p;
    std::ifstream in(source, std::ios::binary);
    if (!in) throw ConfigError(source + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace riskrl

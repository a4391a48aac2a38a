// Command-line front end: runs an experiment config and writes its CSVs.
//
//   riskrl --config desk --out results/ --agents 100
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskrl/config.hpp"
#include "riskrl/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kOutEnv = "RISKRL_OUT_DIR";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Population simulations of risk-perception biases in temporal-difference learning"};

    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<long> agents;
    std::optional<long> steps;
    std::optional<std::string> condition;
    std::optional<std::string> fear_mode;
    std::optional<std::string> bias_q;
    unsigned threads = 0;
    std::string print_preset;
    bool list = false;

    app.add_option("--config", config, "config file, or a preset name (" + [] {
        std::string s;
        for (const auto& n : riskrl::presets::names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }() + ")");
    app.add_option("--out", out, std::string("output directory (default: $") + kOutEnv + ", then the config's output_dir)");
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--agents", agents, "agents per condition");
    app.add_option("--steps", steps, "steps per trial");
    app.add_option("--condition", condition, "run only this condition");
    app.add_option("--fear-mode", fear_mode, "fear reading")->check(CLI::IsMember({"signed", "raw"}));
    app.add_option("--bias-q", bias_q, "action values used for selection")->check(CLI::IsMember({"biased", "unbiased"}));
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--print-preset", print_preset, "print a built-in preset and exit");
    app.add_flag("--list", list, "list the conditions of the config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (!print_preset.empty()) {
        auto p = riskrl::presets::find(print_preset);
        if (!p) {
            std::cerr << "--print-preset: unknown preset '" << print_preset << "'\n";
            return kExitConfig;
        }
        std::cout << *p << '\n';
        return 0;
    }
    if (config.empty()) {
        std::cerr << "--config is required\n";
        return kExitConfig;
    }

    riskrl::ExperimentConfig cfg;
    try {
        nlohmann::json overrides = nlohmann::json::object();
        if (seed) overrides["seed"] = *seed;
        nlohmann::json pop = nlohmann::json::object();
        if (agents) pop["agents"] = *agents;
        if (steps) pop["steps"] = *steps;
        if (fear_mode) pop["fear_mode"] = *fear_mode;
        if (bias_q) pop["bias_q"] = *bias_q;
        if (!pop.empty()) overrides["population"] = pop;
        cfg = riskrl::parse_experiment(riskrl::load_config_text(config), overrides);
    } catch (const riskrl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (list) {
        for (const auto& c : cfg.conditions)
            std::cout << c.name << '\t' << c.population.task.name << '\t' << riskrl::bias_name(c.population.bias) << '\t'
                      << c.population.n_agents << 'x' << c.population.horizon << '\n';
        return 0;
    }

    riskrl::RunOptions opts;
    if (!out.empty()) {
        opts.out_dir = out;
    } else if (const char* env = std::getenv(kOutEnv); env && *env) {
        opts.out_dir = env;
    } else if (!cfg.output_dir.empty()) {
        opts.out_dir = cfg.output_dir;
    } else {
        opts.out_dir = "riskrl_out";
    }
    opts.condition = condition;
    opts.workers = threads;
    opts.on_condition = [](const std::string& name, const riskrl::ConditionAggregate& agg) {
        std::cerr << name << ": " << agg.n_agents() << " agents";
        if (!agg.failures().empty()) std::cerr << ", " << agg.failures().size() << " failed trials";
        std::cerr << '\n';
    };

    try {
        riskrl::run_experiment(cfg, opts);
    } catch (const riskrl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

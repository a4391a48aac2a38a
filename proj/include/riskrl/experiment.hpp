#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskrl/config.hpp"
#include "riskrl/csv.hpp"
#include "riskrl/population.hpp"

namespace riskrl {

inline constexpr const char* kEngineVersion = "riskrl-1.0.0";

struct RunOptions {
    std::filesystem::path out_dir;
    /// run only this condition when set
    std::optional<std::string> condition;
    unsigned workers = 0;
    /// called after each finished condition
    std::function<void(const std::string&, const ConditionAggregate&)> on_condition;
};

inline std::filesystem::path series_path(const std::filesystem::path& dir, const std::string& condition) {
    return dir / ("series_" + condition + ".csv");
}

inline std::filesystem::path agents_path(const std::filesystem::path& dir, const std::string& condition) {
    return dir / ("agents_" + condition + ".csv");
}

/// Runs the configured conditions and writes their series, agent tables and
/// the manifest. A condition's manifest row reads "incomplete" until both of
/// its files are in place.
inline std::vector<csv::ManifestEntry> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::vector<const ConditionConfig*> selected;
    for (const auto& c : cfg.conditions)
        if (!opts.condition || c.name == *opts.condition) selected.push_back(&c);
    if (selected.empty()) throw ConfigError("--condition: no condition named '" + opts.condition.value_or("") + "'");

    std::filesystem::create_directories(opts.out_dir);
    const auto manifest = opts.out_dir / "manifest.csv";
    const std::string hash = config_hash(cfg);

    std::vector<csv::ManifestEntry> entries;
    for (const auto* c : selected)
        entries.push_back({c->name, "incomplete", hash, c->population.master_seed, kEngineVersion,
                           c->population.n_agents, c->population.horizon, 0});
    auto flush = [&] { csv::write_file(manifest, [&](std::ostream& o) { csv::write_manifest(o, entries); }); };
    flush();

    for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto& c = *selected[i];
        const ConditionAggregate agg = run_condition(c.population, opts.workers);
        const auto rows = csv::series_rows(agg.mean_series(), cfg.series_stride);
        csv::write_file(series_path(opts.out_dir, c.name), [&](std::ostream& o) { csv::write_series(o, rows); });
        csv::write_file(agents_path(opts.out_dir, c.name), [&](std::ostream& o) { csv::write_agents(o, agg); });
        entries[i].status = "complete";
        entries[i].failed_agents = static_cast<long>(agg.failures().size());
        flush();
        if (opts.on_condition) opts.on_condition(c.name, agg);
    }
    return entries;
}

}  // namespace riskrl

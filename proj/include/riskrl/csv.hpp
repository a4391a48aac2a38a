#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskrl/population.hpp"

namespace riskrl::csv {

// Fixed column layouts read by the plotting scripts.
inline constexpr const char* kSeriesHeader = "step,mean_joy,mean_distress,mean_fear,mean_reward";
inline constexpr const char* kAgentsHeader = "agent_id,picks_A,picks_B,picks_C,total_reward,gamma,beta,init_offset";
inline constexpr const char* kManifestHeader =
    "condition,status,config_hash,seed,engine_version,agents,steps,failed_agents";

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough to reproduce any double exactly.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw CsvError("not a number: '" + s + "'");
    return x;
}

inline long parse_long(const std::string& s) {
    char* end = nullptr;
    const long x = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw CsvError("not an integer: '" + s + "'");
    return x;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct SeriesRow {
    long step = 0;
    double joy = 0.0;
    double distress = 0.0;
    double fear = 0.0;
    double reward = 0.0;
    bool operator==(const SeriesRow&) const = default;
};

/// Rows of the series file: every `stride`-th step, starting at step 0.
inline std::vector<SeriesRow> series_rows(const MeanSeries& m, long stride = 1) {
    if (stride < 1) throw std::invalid_argument("series stride must be positive");
    std::vector<SeriesRow> rows;
    for (std::size_t t = 0; t < m.reward.size(); t += static_cast<std::size_t>(stride))
        rows.push_back({static_cast<long>(t), m.joy[t], m.distress[t], m.fear[t], m.reward[t]});
    return rows;
}

inline void write_series(std::ostream& out, const std::vector<SeriesRow>& rows) {
    out << kSeriesHeader << '\n';
    for (const auto& r : rows)
        out << r.step << ',' << format_double(r.joy) << ',' << format_double(r.distress) << ','
            << format_double(r.fear) << ',' << format_double(r.reward) << '\n';
}

inline void write_agents(std::ostream& out, const ConditionAggregate& agg) {
    out << kAgentsHeader << '\n';
    for (const auto& a : agg.agents())
        out << a.agent_id << ',' << a.picks[0] << ',' << a.picks[1] << ',' << a.picks[2] << ','
            << format_double(a.total_reward) << ',' << format_double(a.gamma) << ',' << format_double(a.beta) << ','
            << format_double(a.init_offset) << '\n';
}

namespace detail {

inline std::vector<std::vector<std::string>> read_table(std::istream& in, const char* header, std::size_t columns) {
    std::string line;
    if (!std::getline(in, line) || line != header) throw CsvError(std::string("expected header '") + header + "'");
    std::vector<std::vector<std::string>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != columns)
            throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace detail

inline std::vector<SeriesRow> read_series(std::istream& in) {
    std::vector<SeriesRow> out;
    for (const auto& c : detail::read_table(in, kSeriesHeader, 5))
        out.push_back({parse_long(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                       parse_double(c[4])});
    return out;
}

/// Agent rows as written; window means are not part of the file.
inline std::vector<AgentRecord> read_agents(std::istream& in) {
    std::vector<AgentRecord> out;
    for (const auto& c : detail::read_table(in, kAgentsHeader, 8)) {
        AgentRecord a;
        a.agent_id = parse_long(c[0]);
        a.picks = {parse_long(c[1]), parse_long(c[2]), parse_long(c[3])};
        a.total_reward = parse_double(c[4]);
        a.gamma = parse_double(c[5]);
        a.beta = parse_double(c[6]);
        a.init_offset = parse_double(c[7]);
        out.push_back(a);
    }
    return out;
}

struct ManifestEntry {
    std::string condition;
    std::string status;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string engine_version;
    long agents = 0;
    long steps = 0;
    long failed_agents = 0;
    bool operator==(const ManifestEntry&) const = default;
};

inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    out << kManifestHeader << '\n';
    for (const auto& e : entries)
        out << e.condition << ',' << e.status << ',' << e.config_hash << ',' << e.seed << ',' << e.engine_version << ','
            << e.agents << ',' << e.steps << ',' << e.failed_agents << '\n';
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::vector<ManifestEntry> out;
    for (const auto& c : detail::read_table(in, kManifestHeader, 8))
        out.push_back({c[0], c[1], c[2], std::stoull(c[3]), c[4], parse_long(c[5]), parse_long(c[6]),
                       parse_long(c[7])});
    return out;
}

/// Writes `content` to `path` through a temporary file and a rename.
template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace riskrl::csv

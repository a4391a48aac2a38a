#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "riskrl/behavior.hpp"
#include "riskrl/gridworld.hpp"
#include "riskrl/rng.hpp"
#include "riskrl/valuation.hpp"

namespace riskrl {

/// Half-open range of step indices [begin, end) over which per-agent means are kept.
struct StepWindow {
    long begin = 0;
    long end = 0;
    long length() const noexcept { return end - begin; }
};

struct PopulationConfig {
    long n_agents = 5000;
    long horizon = 5000;
    double gamma_mean = 0.9;
    double gamma_std = 0.01;
    double beta_mean = 10.0;
    double beta_std = 1.0;
    double init_value_mean = 0.0;
    double init_value_std = 0.1;
    /// draw an independent initial value per state instead of one offset per agent
    bool per_state_init = false;
    BiasMode bias = BiasMode::Realistic;
    double exp_temperature = 1.0;
    AgentOptions options;
    TaskSpec task;
    std::uint64_t master_seed = 0;
    /// extra per-agent window means recorded alongside the population series
    std::vector<StepWindow> windows;

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("n_agents must be at least 1");
        if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
        if (gamma_std < 0.0 || beta_std < 0.0 || init_value_std < 0.0)
            throw std::invalid_argument("standard deviations must be non-negative");
        if (!(exp_temperature > 0.0)) throw std::invalid_argument("exp_temperature must be positive");
        if (!task.finalized()) throw std::invalid_argument("population task is not finalized");
        for (const auto& w : windows)
            if (w.begin < 0 || w.end <= w.begin || w.end > horizon)
                throw std::invalid_argument("step window outside the horizon");
    }
};

inline constexpr double kGammaMin = 0.5;
inline constexpr double kGammaMax = 0.999;

/// Parameters of agent `agent_index`, drawn from its own parameter stream.
inline AgentParams sample_agent(const PopulationConfig& cfg, long agent_index, std::uint64_t master_seed) {
    RandomStream rng(master_seed, static_cast<std::uint64_t>(agent_index), StreamPurpose::Parameters);
    AgentParams p;
    p.gamma = std::clamp(rng.normal(cfg.gamma_mean, cfg.gamma_std), kGammaMin, kGammaMax);
    p.beta = std::max(0.0, rng.normal(cfg.beta_mean, cfg.beta_std));
    p.init_offset = rng.normal(cfg.init_value_mean, cfg.init_value_std);
    if (cfg.task.forced_random_actions) p.beta = 0.0;
    p.bias = cfg.bias;
    p.exp_temperature = cfg.exp_temperature;
    return p;
}

/// Independent per-state initial values, used when `cfg.per_state_init` is set.
inline std::vector<double> sample_state_offsets(const PopulationConfig& cfg, long agent_index,
                                                std::uint64_t master_seed) {
    RandomStream rng(master_seed, static_cast<std::uint64_t>(agent_index), StreamPurpose::InitialValues);
    std::vector<double> init(cfg.task.num_nodes());
    for (double& x : init) x = rng.normal(cfg.init_value_mean, cfg.init_value_std);
    return init;
}

// *******************************************************
// Trials
// *******************************************************

/// Consumption counts indexed by payoff, plus the trial's reward total.
struct TrialSummary {
    std::vector<long> picks;
    double total_reward = 0.0;
};

struct TrialRecord {
    std::vector<StepLog> steps;
    TrialSummary summary;
};

/// Runs one trial and hands every StepLog to `sink` as it is produced.
template <typename Sink>
TrialSummary simulate_trial(const AgentParams& params, const TaskSpec& task, long horizon, RandomStream rng,
                            Sink&& sink, AgentOptions options = {},
                            std::optional<std::vector<double>> per_state_init = std::nullopt) {
    TrialSummary summary;
    summary.picks.assign(task.payoffs.size(), 0);
    if (horizon <= 0) return summary;
    Agent agent(task, params, std::move(rng), options, std::move(per_state_init));
    for (long t = 0; t < horizon; ++t) {
        const StepLog log = agent_step(agent, task);
        summary.total_reward += log.reward;
        if (log.consumed) ++summary.picks[log.consumed->payoff];
        sink(log);
    }
    return summary;
}

inline TrialRecord run_trial(const AgentParams& params, const TaskSpec& task, long horizon, RandomStream rng,
                             AgentOptions options = {},
                             std::optional<std::vector<double>> per_state_init = std::nullopt) {
    TrialRecord rec;
    rec.steps.reserve(static_cast<std::size_t>(std::max(horizon, 0L)));
    rec.summary = simulate_trial(
        params, task, horizon, std::move(rng), [&](const StepLog& log) { rec.steps.push_back(log); }, options,
        std::move(per_state_init));
    return rec;
}

// *******************************************************
// Condition aggregates
// *******************************************************

/// Means of one agent's step measures over a StepWindow.
struct WindowMeans {
    double joy = 0.0;
    double distress = 0.0;
    double fear = 0.0;
    double hope = 0.0;
    double reward = 0.0;
    /// consumptions of options A, B, C inside the window (counts, not means)
    std::array<long, 3> picks{0, 0, 0};
    bool operator==(const WindowMeans&) const = default;
};

/// Column order of the choice counts: options A, B and C.
inline constexpr std::array<const char*, 3> kOptionColumns{"A", "B", "C"};

struct AgentRecord {
    long agent_id = 0;
    std::array<long, 3> picks{0, 0, 0};
    double total_reward = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double init_offset = 0.0;
    std::vector<WindowMeans> windows;
    bool operator==(const AgentRecord&) const = default;
};

struct TrialFailure {
    long agent_id = 0;
    std::string message;
    bool operator==(const TrialFailure&) const = default;
};

struct MeanSeries {
    std::vector<double> joy;
    std::vector<double> distress;
    std::vector<double> fear;
    std::vector<double> hope;
    std::vector<double> reward;
};

/**
  Sums of per-step measures over agents plus one record per agent.

  Merging adds the sums and concatenates the agent records (kept sorted by
  agent id), so partial aggregates from different workers can be combined in
  any grouping.
 */
class ConditionAggregate {
public:
    ConditionAggregate() = default;
    explicit ConditionAggregate(long horizon)
        : horizon_(horizon),
          joy_(horizon, 0.0),
          distress_(horizon, 0.0),
          fear_(horizon, 0.0),
          hope_(horizon, 0.0),
          reward_(horizon, 0.0) {}

    long horizon() const noexcept { return horizon_; }
    long n_agents() const noexcept { return static_cast<long>(agents_.size()); }
    bool empty() const noexcept { return agents_.empty() && failures_.empty(); }

    const std::vector<AgentRecord>& agents() const noexcept { return agents_; }
    const std::vector<TrialFailure>& failures() const noexcept { return failures_; }

    const std::vector<double>& sum_joy() const noexcept { return joy_; }
    const std::vector<double>& sum_distress() const noexcept { return distress_; }
    const std::vector<double>& sum_fear() const noexcept { return fear_; }
    const std::vector<double>& sum_hope() const noexcept { return hope_; }
    const std::vector<double>& sum_reward() const noexcept { return reward_; }

    void add_step(long t, const StepLog& log) {
        joy_[t] += log.joy;
        distress_[t] += log.distress;
        fear_[t] += log.fear;
        hope_[t] += log.hope;
        reward_[t] += log.reward;
    }

    void add_agent(AgentRecord rec) {
        auto pos = std::upper_bound(agents_.begin(), agents_.end(), rec.agent_id,
                                    [](long id, const AgentRecord& r) { return id < r.agent_id; });
        agents_.insert(pos, std::move(rec));
    }

    void add_failure(TrialFailure f) { failures_.push_back(std::move(f)); }

    MeanSeries mean_series() const {
        MeanSeries m;
        const double n = static_cast<double>(std::max(n_agents(), 1L));
        auto scale = [n](const std::vector<double>& v) {
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
            return out;
        };
        m.joy = scale(joy_);
        m.distress = scale(distress_);
        m.fear = scale(fear_);
        m.hope = scale(hope_);
        m.reward = scale(reward_);
        return m;
    }

    /// Number of agents whose pick count of `option` (0=A, 1=B, 2=C) falls in
    /// each bin of width `bin_width`, from 0 up to the largest count.
    std::vector<long> histogram(int option, long bin_width) const {
        if (bin_width < 1) throw std::invalid_argument("bin width must be positive");
        if (option < 0 || option >= static_cast<int>(kOptionColumns.size()))
            throw std::out_of_range("unknown option column");
        long top = 0;
        for (const auto& a : agents_) top = std::max(top, a.picks[option]);
        std::vector<long> bins(static_cast<std::size_t>(top / bin_width + 1), 0);
        for (const auto& a : agents_) ++bins[a.picks[option] / bin_width];
        return bins;
    }

    friend ConditionAggregate merge(const ConditionAggregate& a, const ConditionAggregate& b) {
        if (a.horizon_ == 0 && a.empty()) return b;
        if (b.horizon_ == 0 && b.empty()) return a;
        if (a.horizon_ != b.horizon_) throw std::invalid_argument("merging aggregates with different horizons");
        ConditionAggregate out(a.horizon_);
        for (long t = 0; t < a.horizon_; ++t) {
            out.joy_[t] = a.joy_[t] + b.joy_[t];
            out.distress_[t] = a.distress_[t] + b.distress_[t];
            out.fear_[t] = a.fear_[t] + b.fear_[t];
            out.hope_[t] = a.hope_[t] + b.hope_[t];
            out.reward_[t] = a.reward_[t] + b.reward_[t];
        }
        out.agents_.reserve(a.agents_.size() + b.agents_.size());
        std::merge(a.agents_.begin(), a.agents_.end(), b.agents_.begin(), b.agents_.end(),
                   std::back_inserter(out.agents_),
                   [](const AgentRecord& x, const AgentRecord& y) { return x.agent_id < y.agent_id; });
        out.failures_ = a.failures_;
        out.failures_.insert(out.failures_.end(), b.failures_.begin(), b.failures_.end());
        std::sort(out.failures_.begin(), out.failures_.end(),
                  [](const TrialFailure& x, const TrialFailure& y) { return x.agent_id < y.agent_id; });
        return out;
    }

    bool operator==(const ConditionAggregate&) const = default;

private:
    long horizon_ = 0;
    std::vector<double> joy_;
    std::vector<double> distress_;
    std::vector<double> fear_;
    std::vector<double> hope_;
    std::vector<double> reward_;
    std::vector<AgentRecord> agents_;
    std::vector<TrialFailure> failures_;
};

/// Runs agent `agent_index` of the condition and folds it into `into`.
inline void run_agent_into(const PopulationConfig& cfg, long agent_index, ConditionAggregate& into) {
    const AgentParams params = sample_agent(cfg, agent_index, cfg.master_seed);
    std::optional<std::vector<double>> init;
    if (cfg.per_state_init) init = sample_state_offsets(cfg, agent_index, cfg.master_seed);
    RandomStream rng(cfg.master_seed, static_cast<std::uint64_t>(agent_index), StreamPurpose::Trial);

    AgentRecord rec;
    rec.agent_id = agent_index;
    rec.gamma = params.gamma;
    rec.beta = params.beta;
    rec.init_offset = params.init_offset;
    rec.windows.assign(cfg.windows.size(), WindowMeans{});

    std::vector<int> option_column(cfg.task.payoffs.size(), -1);
    for (std::size_t p = 0; p < cfg.task.payoffs.size(); ++p)
        for (std::size_t c = 0; c < kOptionColumns.size(); ++c)
            if (cfg.task.payoffs[p].option == kOptionColumns[c]) option_column[p] = static_cast<int>(c);

    long t = 0;
    const TrialSummary summary = simulate_trial(
        params, cfg.task, cfg.horizon, std::move(rng),
        [&](const StepLog& log) {
            into.add_step(t, log);
            for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
                if (t < cfg.windows[w].begin || t >= cfg.windows[w].end) continue;
                auto& m = rec.windows[w];
                m.joy += log.joy;
                m.distress += log.distress;
                m.fear += log.fear;
                m.hope += log.hope;
                m.reward += log.reward;
                if (log.consumed) {
                    const int c = option_column[log.consumed->payoff];
                    if (c >= 0) ++m.picks[c];
                }
            }
            ++t;
        },
        cfg.options, std::move(init));

    for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
        const double len = static_cast<double>(cfg.windows[w].length());
        auto& m = rec.windows[w];
        m.joy /= len;
        m.distress /= len;
        m.fear /= len;
        m.hope /= len;
        m.reward /= len;
    }
    for (std::size_t p = 0; p < cfg.task.payoffs.size(); ++p)
        if (option_column[p] >= 0) rec.picks[option_column[p]] += summary.picks[p];
    rec.total_reward = summary.total_reward;
    into.add_agent(std::move(rec));
}

/// Agents per work unit. Units are reduced in index order, so the result does
/// not depend on how many workers ran them.
inline constexpr long kAgentBlock = 32;

/// Runs every agent of the condition on `workers` threads (0 = hardware concurrency).
inline ConditionAggregate run_condition(const PopulationConfig& cfg, unsigned workers = 0) {
    cfg.validate();
    const long n_blocks = (cfg.n_agents + kAgentBlock - 1) / kAgentBlock;
    std::vector<ConditionAggregate> blocks(static_cast<std::size_t>(n_blocks));
    std::atomic<long> next{0};

    auto work = [&] {
        for (long b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
            ConditionAggregate part(cfg.horizon);
            const long end = std::min(cfg.n_agents, (b + 1) * kAgentBlock);
            for (long i = b * kAgentBlock; i < end; ++i) {
                // a failed trial may have added some of its steps; redo the block
                // without it so the sums only hold completed agents
                try {
                    ConditionAggregate single(cfg.horizon);
                    run_agent_into(cfg, i, single);
                    part = merge(part, single);
                } catch (const std::bad_alloc&) {
                    part.add_failure({i, "out of memory"});
                } catch (const std::exception& e) {
                    part.add_failure({i, e.what()});
                }
            }
            blocks[b] = std::move(part);
        }
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<long>(workers, std::max(n_blocks, 1L)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    ConditionAggregate total(cfg.horizon);
    for (auto& b : blocks) total = merge(total, b);
    return total;
}

}  // namespace riskrl

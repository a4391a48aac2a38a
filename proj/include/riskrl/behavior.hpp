#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "riskrl/gridworld.hpp"
#include "riskrl/model.hpp"
#include "riskrl/rng.hpp"
#include "riskrl/valuation.hpp"

namespace riskrl {

// *******************************************************
// Boltzmann selection
// *******************************************************

/// Softmax probabilities p(i) ∝ exp(beta * q[i]), shifted by the largest
/// exponent before exponentiation.
inline std::vector<double> boltzmann_probabilities(std::span<const double> qs, double beta) {
    if (qs.empty()) throw std::invalid_argument("boltzmann selection over an empty set");
    if (!(beta >= 0.0)) throw std::invalid_argument("inverse temperature must be non-negative");
    std::vector<double> p(qs.size());
    if (beta == 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(qs.size()));
        return p;
    }
    const double top = beta * *std::max_element(qs.begin(), qs.end());
    double total = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        p[i] = std::exp(beta * qs[i] - top);
        total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
}

/// Index drawn from the Boltzmann distribution over `qs`.
inline std::size_t boltzmann_select(std::span<const double> qs, double beta, RandomStream& rng) {
    const auto p = boltzmann_probabilities(qs, beta);
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return p.size() - 1;
}

inline Action boltzmann_select(const std::array<double, kNumActions>& qs, double beta, RandomStream& rng) {
    return kAllActions[boltzmann_select(std::span<const double>(qs), beta, rng)];
}

// *******************************************************
// Agent loop
// *******************************************************

/// Which quantity is reported as fear.
enum class FearMode {
    Signed,  ///< magnitude of the negative pathway value, -v_minus(s)
    Raw,     ///< -min(v(s), 0)
};

struct AgentOptions {
    SelectionValues selection = SelectionValues::Biased;
    FearMode fear = FearMode::Signed;
};

struct StepLog {
    long step_index = 0;
    int state = 0;
    Action action = Action::Up;
    double reward = 0.0;
    double delta = 0.0;
    double joy = 0.0;
    double distress = 0.0;
    double fear = 0.0;
    double hope = 0.0;
    std::optional<Consumption> consumed;
};

/// Everything one simulated individual owns during a trial.
struct Agent {
    AgentParams params;
    AgentOptions options;
    EmpiricalModel model;
    ValueTable values;
    WorldState world;
    RandomStream rng;

    Agent(const TaskSpec& spec, AgentParams p, RandomStream stream, AgentOptions opts = {},
          std::optional<std::vector<double>> per_state_init = std::nullopt)
        : params(p), options(opts), model(spec), rng(std::move(stream)) {
        if (!spec.finalized()) throw std::logic_error("task spec used before finalize()");
        if (per_state_init) {
            if (per_state_init->size() != static_cast<std::size_t>(spec.num_nodes()))
                throw std::invalid_argument("per-state initial values do not match the task");
            values = ValueTable(spec.terminal_mask(), *per_state_init, p.init_offset);
        } else {
            values = ValueTable(spec.terminal_mask(), p.init_offset);
        }
        world = initial_state(spec, rng);
    }
};

/// One step of online learning: select, act, observe, recompute the departed
/// state's value and its signed pathway values, then respawn on consumption.
inline StepLog agent_step(Agent& agent, const TaskSpec& spec) {
    const int s = agent.world.agent_pos;
    const auto qs = action_values(agent.model, agent.values, s, agent.params, agent.options.selection);
    const Action requested = boltzmann_select(qs, agent.params.beta, agent.rng);

    StepResult r = step(spec, agent.world, requested, agent.rng);
    agent.model.observe(s, r.action, r.successor, r.reward);

    const double v_old = agent.values.v(s);
    const double v_new = recompute_value(agent.model, agent.values, s, agent.params);
    const double d = delta(v_old, v_new);
    agent.values.set_v(s, v_new);
    const auto [plus, minus] = update_signed_values(agent.model, agent.values, s, agent.params.gamma);
    agent.values.set_signed(s, plus, minus);

    StepLog log;
    log.step_index = agent.world.step_count;
    log.state = s;
    log.action = r.action;
    log.reward = r.reward;
    log.delta = d;
    log.joy = d > 0.0 ? d : 0.0;
    log.distress = d < 0.0 ? -d : 0.0;
    // 0.0 - x keeps a zero reading at +0
    log.fear = agent.options.fear == FearMode::Signed ? 0.0 - agent.values.v_minus(s)
                                                      : 0.0 - std::min(agent.values.v(s), 0.0);
    log.hope = agent.values.v_plus(s);
    log.consumed = r.consumed;
    agent.world = std::move(r.state);
    return log;
}

}  // namespace riskrl

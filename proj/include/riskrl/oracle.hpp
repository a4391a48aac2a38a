#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "riskrl/gridworld.hpp"
#include "riskrl/rng.hpp"

namespace riskrl::oracle {

/// How goal consumption continues in the exact model.
enum class GoalHandling {
    Terminal,  ///< outcome nodes are absorbing with value 0, as in the learner
    Respawn,   ///< outcome nodes jump uniformly to the start cells
};

struct Transition {
    int next = 0;
    double probability = 0.0;
    double reward = 0.0;
};

/// Fully enumerated task MDP over the task's node space.
struct ExactMDP {
    int num_states = 0;
    double gamma = 0.9;
    /// rows[s][a] lists the successors of (s, a)
    std::vector<std::array<std::vector<Transition>, kNumActions>> rows;
    /// set when the dynamics were replaced by a stationary approximation
    bool approximate = false;

    double row_sum(int s, int a) const {
        double t = 0.0;
        for (const auto& tr : rows[s][a]) t += tr.probability;
        return t;
    }

    double backup(const std::vector<double>& v, int s, int a) const {
        double q = 0.0;
        for (const auto& tr : rows[s][a]) q += tr.probability * (tr.reward + gamma * v[tr.next]);
        return q;
    }
};

using Policy = std::vector<std::array<double, kNumActions>>;

namespace detail {

// Successors of moving from `cell` with action `a` when payoffs sit at the
// slots with the given probabilities (placement[slot][payoff]).
inline std::vector<Transition> move_row(const TaskSpec& spec, int cell, Action a,
                                        const std::vector<std::vector<double>>& placement) {
    const int target = spec.neighbor(cell, a);
    if (target == cell) return {{cell, 1.0, 0.0}};
    const double punish = spec.punishment_at(target);
    const int slot = spec.slot_at(target);
    if (slot < 0) return {{target, 1.0, punish}};
    std::vector<Transition> out;
    double occupied = 0.0;
    for (std::size_t p = 0; p < spec.payoffs.size(); ++p) {
        const double pp = placement[slot][p];
        if (pp == 0.0) continue;
        occupied += pp;
        const auto& outcomes = spec.payoffs[p].spec.outcomes;
        for (std::size_t o = 0; o < outcomes.size(); ++o)
            out.push_back({spec.terminal_node(slot, static_cast<int>(p), static_cast<int>(o)),
                           pp * outcomes[o].probability, punish + outcomes[o].reward});
    }
    if (occupied < 1.0) out.push_back({target, 1.0 - occupied, punish});
    return out;
}

}  // namespace detail

/// Enumerates the task's transitions and rewards. Relocating tasks use the
/// stationary placement distribution (each payoff equally likely in every
/// slot) and are flagged as approximate. Under forced random actions every
/// requested action leads to the uniform mixture of the four moves.
inline ExactMDP from_task(const TaskSpec& spec, double gamma, GoalHandling goals = GoalHandling::Respawn) {
    if (!spec.finalized()) throw std::logic_error("task spec used before finalize()");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    ExactMDP mdp;
    mdp.num_states = spec.num_nodes();
    mdp.gamma = gamma;
    mdp.rows.resize(mdp.num_states);
    mdp.approximate = spec.relocating_payoffs;

    const std::size_t n_slots = spec.goal_slots.size();
    std::vector<std::vector<double>> placement(n_slots, std::vector<double>(spec.payoffs.size(), 0.0));
    for (std::size_t k = 0; k < n_slots; ++k) {
        if (spec.relocating_payoffs) {
            for (auto& p : placement[k]) p = 1.0 / static_cast<double>(n_slots);
        } else {
            placement[k][spec.initial_placement[k]] = 1.0;
        }
    }

    for (int c = 0; c < spec.num_cells(); ++c) {
        std::array<std::vector<Transition>, kNumActions> moves;
        for (Action a : kAllActions) moves[action_index(a)] = detail::move_row(spec, c, a, placement);
        if (spec.forced_random_actions) {
            std::vector<Transition> mix;
            for (const auto& row : moves)
                for (auto tr : row) {
                    tr.probability /= kNumActions;
                    mix.push_back(tr);
                }
            for (auto& row : mdp.rows[c]) row = mix;
        } else {
            mdp.rows[c] = std::move(moves);
        }
    }

    if (goals == GoalHandling::Respawn) {
        std::vector<Transition> after_goal;
        const auto& starts = spec.start_indices();
        for (int s : starts) after_goal.push_back({s, 1.0 / static_cast<double>(starts.size()), 0.0});
        for (int n = spec.num_cells(); n < mdp.num_states; ++n)
            for (auto& r : mdp.rows[n]) r = after_goal;
    }
    // under GoalHandling::Terminal the outcome nodes keep empty rows and value 0
    return mdp;
}

struct SolveResult {
    std::vector<double> values;
    long iterations = 0;
};

inline constexpr long kMaxIterations = 1'000'000;

/// Nodes with no outgoing transitions keep value 0.
inline SolveResult value_iteration(const ExactMDP& mdp, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    SolveResult r{std::vector<double>(mdp.num_states, 0.0), 0};
    std::vector<double> next(mdp.num_states, 0.0);
    while (r.iterations < kMaxIterations) {
        ++r.iterations;
        double change = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            bool any = false;
            double best = -INFINITY;
            for (int a = 0; a < kNumActions; ++a) {
                if (mdp.rows[s][a].empty()) continue;
                any = true;
                best = std::max(best, mdp.backup(r.values, s, a));
            }
            next[s] = any ? best : 0.0;
            change = std::max(change, std::abs(next[s] - r.values[s]));
        }
        r.values.swap(next);
        // sup-norm change below tol(1-gamma)/gamma bounds the distance to the fixed point by tol
        if (change < tol * (1.0 - mdp.gamma) / mdp.gamma) return r;
    }
    throw std::runtime_error("value iteration hit the iteration cap");
}

inline SolveResult policy_evaluation(const ExactMDP& mdp, const Policy& policy, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (policy.size() != static_cast<std::size_t>(mdp.num_states))
        throw std::invalid_argument("policy does not cover every state");
    SolveResult r{std::vector<double>(mdp.num_states, 0.0), 0};
    std::vector<double> next(mdp.num_states, 0.0);
    while (r.iterations < kMaxIterations) {
        ++r.iterations;
        double change = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            double v = 0.0;
            for (int a = 0; a < kNumActions; ++a)
                if (policy[s][a] > 0.0 && !mdp.rows[s][a].empty()) v += policy[s][a] * mdp.backup(r.values, s, a);
            next[s] = v;
            change = std::max(change, std::abs(next[s] - r.values[s]));
        }
        r.values.swap(next);
        if (change < tol * (1.0 - mdp.gamma) / mdp.gamma) return r;
    }
    throw std::runtime_error("policy evaluation hit the iteration cap");
}

/// Largest |V(s) - max_a backup(V, s, a)| over states with actions.
inline double bellman_residual(const ExactMDP& mdp, const std::vector<double>& v) {
    double worst = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        bool any = false;
        double best = -INFINITY;
        for (int a = 0; a < kNumActions; ++a) {
            if (mdp.rows[s][a].empty()) continue;
            any = true;
            best = std::max(best, mdp.backup(v, s, a));
        }
        worst = std::max(worst, std::abs((any ? best : 0.0) - v[s]));
    }
    return worst;
}

struct PayoffEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of `n` independent outcome draws.
inline PayoffEstimate monte_carlo_payoff(const PayoffSpec& payoff, long n, RandomStream& rng) {
    if (n < 1) throw std::invalid_argument("monte_carlo_payoff needs at least one draw");
    // Welford: exact for constant payoffs
    double mean = 0.0;
    double m2 = 0.0;
    for (long i = 1; i <= n; ++i) {
        const double x = payoff.outcomes[sample_outcome(payoff, rng)].reward;
        const double d = x - mean;
        mean += d / static_cast<double>(i);
        m2 += d * (x - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace riskrl::oracle

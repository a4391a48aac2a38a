#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "riskrl/gridworld.hpp"

namespace riskrl {

/**
  Per-agent empirical estimate of the task: how often each state was left,
  how often each action was taken there, where it led and what it paid.

  States are cell indices in [0, num_states()); successors are node ids in
  [0, num_nodes()) which include the terminal outcome nodes of the task.
  Probabilities are plain ratios of counts with no smoothing; rewards are
  running means per (s, a, next).
 */
class EmpiricalModel {
public:
    EmpiricalModel() = default;

    EmpiricalModel(int num_states, int num_nodes)
        : num_states_(num_states),
          num_nodes_(num_nodes),
          visits_(num_states, 0),
          actions_(static_cast<std::size_t>(num_states) * kNumActions, 0),
          transitions_(static_cast<std::size_t>(num_states) * kNumActions * num_nodes, 0),
          reward_means_(transitions_.size(), 0.0) {
        if (num_states <= 0 || num_nodes < num_states) throw std::invalid_argument("invalid model dimensions");
    }

    explicit EmpiricalModel(const TaskSpec& spec) : EmpiricalModel(spec.num_cells(), spec.num_nodes()) {}

    int num_states() const noexcept { return num_states_; }
    int num_nodes() const noexcept { return num_nodes_; }

    void observe(int s, Action a, int next, double reward) {
        check(s, next);
        const std::size_t sa = sa_index(s, a);
        ++visits_[s];
        ++actions_[sa];
        const std::size_t i = sa * num_nodes_ + next;
        ++transitions_[i];
        reward_means_[i] += (reward - reward_means_[i]) / static_cast<double>(transitions_[i]);
    }

    std::uint64_t visit_count(int s) const { return visits_.at(s); }
    std::uint64_t action_count(int s, Action a) const { return actions_.at(sa_index(s, a)); }
    std::uint64_t transition_count(int s, Action a, int next) const {
        return transitions_.at(sa_index(s, a) * num_nodes_ + next);
    }

    /// Observed frequency of `next` after (s, a). For an (s, a) never tried this
    /// falls back to the uniform distribution over the successors observed from
    /// s under any action, or 0 when s itself was never left.
    double transition_prob(int s, Action a, int next) const {
        const std::uint64_t n = action_count(s, a);
        if (n > 0) return static_cast<double>(transition_count(s, a, next)) / static_cast<double>(n);
        int support = 0;
        bool seen_next = false;
        for (int k = 0; k < num_nodes_; ++k) {
            bool seen = false;
            for (Action b : kAllActions) seen = seen || transition_count(s, b, k) > 0;
            if (seen) {
                ++support;
                seen_next = seen_next || k == next;
            }
        }
        return seen_next ? 1.0 / support : 0.0;
    }

    /// Mean observed reward on (s, a, next); 0 when never observed.
    double expected_reward(int s, Action a, int next) const {
        return reward_means_.at(sa_index(s, a) * num_nodes_ + next);
    }

    /// Historical frequency of choosing `a` in `s`; uniform before the first visit.
    double policy_freq(int s, Action a) const {
        const std::uint64_t n = visit_count(s);
        if (n == 0) return 1.0 / kNumActions;
        return static_cast<double>(action_count(s, a)) / static_cast<double>(n);
    }

    /// Calls f(next, probability, mean_reward) for every observed successor of (s, a).
    template <typename F>
    void for_each_successor(int s, Action a, F&& f) const {
        const std::size_t sa = sa_index(s, a);
        const std::uint64_t n = actions_[sa];
        if (n == 0) return;
        const double total = static_cast<double>(n);
        const std::size_t base = sa * num_nodes_;
        for (int k = 0; k < num_nodes_; ++k) {
            const std::uint64_t c = transitions_[base + k];
            if (c == 0) continue;
            f(k, static_cast<double>(c) / total, reward_means_[base + k]);
        }
    }

private:
    std::size_t sa_index(int s, Action a) const {
        return static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(action_index(a));
    }

    void check(int s, int next) const {
        if (s < 0 || s >= num_states_) throw std::out_of_range("state outside model");
        if (next < 0 || next >= num_nodes_) throw std::out_of_range("successor outside model");
    }

    int num_states_ = 0;
    int num_nodes_ = 0;
    std::vector<std::uint64_t> visits_;
    std::vector<std::uint64_t> actions_;
    std::vector<std::uint64_t> transitions_;
    // running mean per (s, a, next), exact for constant rewards
    std::vector<double> reward_means_;
};

}  // namespace riskrl

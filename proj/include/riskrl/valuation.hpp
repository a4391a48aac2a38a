#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskrl/model.hpp"

namespace riskrl {

/// How an agent perceives risk when recomputing state values.
enum class BiasMode {
    Realistic,          ///< probability-weighted over actions and outcomes
    ActionOptimistic,   ///< assumes the best action will be taken
    OutcomeOptimistic,  ///< assumes the best outcome of the best action will occur
    ExpWeighted,        ///< outcome probabilities tilted by exp(outcome value / temperature)
};

inline constexpr std::array<BiasMode, 4> kAllBiasModes{BiasMode::Realistic, BiasMode::ActionOptimistic,
                                                      BiasMode::OutcomeOptimistic, BiasMode::ExpWeighted};

inline std::string_view bias_name(BiasMode b) noexcept {
    switch (b) {
        case BiasMode::Realistic: return "realistic";
        case BiasMode::ActionOptimistic: return "action_optimistic";
        case BiasMode::OutcomeOptimistic: return "outcome_optimistic";
        case BiasMode::ExpWeighted: return "exp_weighted";
    }
    return "?";
}

inline std::optional<BiasMode> parse_bias(std::string_view s) noexcept {
    for (BiasMode b : kAllBiasModes)
        if (bias_name(b) == s) return b;
    return std::nullopt;
}

struct AgentParams {
    double gamma = 0.9;
    double beta = 10.0;
    double init_offset = 0.0;
    BiasMode bias = BiasMode::Realistic;
    double exp_temperature = 1.0;
};

/**
  State values of one agent, together with the positive and negative pathway
  values used for hope and fear. Terminal (consumed-outcome) nodes always
  have value 0; every other node starts at its initial value.
 */
class ValueTable {
public:
    ValueTable() = default;

    ValueTable(std::vector<bool> terminal, double init_offset)
        : ValueTable(terminal, std::vector<double>(terminal.size(), init_offset), init_offset) {}

    /// Per-state initial values; `init_offset` is kept as the agent's nominal offset.
    ValueTable(std::vector<bool> terminal, std::vector<double> initial, double init_offset)
        : terminal_(std::move(terminal)),
          initial_(std::move(initial)),
          v_(initial_),
          v_plus_(terminal_.size(), 0.0),
          v_minus_(terminal_.size(), 0.0),
          init_offset_(init_offset) {
        if (initial_.size() != terminal_.size()) throw std::invalid_argument("value table size mismatch");
        for (std::size_t n = 0; n < terminal_.size(); ++n)
            if (terminal_[n]) initial_[n] = v_[n] = 0.0;
    }

    std::size_t size() const noexcept { return v_.size(); }
    bool is_terminal(int n) const { return terminal_.at(n); }

    double v(int n) const { return v_.at(n); }
    double v_plus(int n) const { return v_plus_.at(n); }
    double v_minus(int n) const { return v_minus_.at(n); }
    double initial(int n) const { return initial_.at(n); }
    double init_offset() const noexcept { return init_offset_; }

    void set_v(int n, double value) {
        if (terminal_.at(n)) throw std::logic_error("terminal nodes have fixed value");
        v_[n] = value;
    }

    void set_signed(int n, double plus, double minus) {
        if (terminal_.at(n)) throw std::logic_error("terminal nodes have fixed value");
        v_plus_[n] = std::max(plus, 0.0);
        v_minus_[n] = std::min(minus, 0.0);
    }

private:
    std::vector<bool> terminal_;
    std::vector<double> initial_;
    std::vector<double> v_;
    std::vector<double> v_plus_;
    std::vector<double> v_minus_;
    double init_offset_ = 0.0;
};

// *******************************************************
// Action values
// *******************************************************

/// Value of taking `a` in `s` as perceived under `bias`.
///
/// Realistic and ActionOptimistic share the plain expectation over observed
/// outcomes; OutcomeOptimistic takes the best observed outcome; ExpWeighted
/// reweights outcome probabilities by exp(outcome value / temperature).
/// An action never tried in `s` is valued at the initial value of `s`.
inline double q_value(const EmpiricalModel& m, const ValueTable& vt, int s, Action a, BiasMode bias, double gamma,
                      double exp_temperature = 1.0) {
    if (m.action_count(s, a) == 0) return vt.initial(s);
    switch (bias) {
        case BiasMode::Realistic:
        case BiasMode::ActionOptimistic: {
            double q = 0.0;
            m.for_each_successor(s, a, [&](int n, double p, double r) { q += p * (r + gamma * vt.v(n)); });
            return q;
        }
        case BiasMode::OutcomeOptimistic: {
            double q = -std::numeric_limits<double>::infinity();
            m.for_each_successor(s, a, [&](int n, double, double r) { q = std::max(q, r + gamma * vt.v(n)); });
            return q;
        }
        case BiasMode::ExpWeighted: {
            if (!(exp_temperature > 0.0)) throw std::invalid_argument("exp_temperature must be positive");
            // shift by the largest outcome value so the exponentials cannot overflow
            double top = -std::numeric_limits<double>::infinity();
            m.for_each_successor(s, a, [&](int n, double, double r) { top = std::max(top, r + gamma * vt.v(n)); });
            double weight = 0.0;
            double acc = 0.0;
            m.for_each_successor(s, a, [&](int n, double p, double r) {
                const double x = r + gamma * vt.v(n);
                const double w = p * std::exp((x - top) / exp_temperature);
                weight += w;
                acc += w * x;
            });
            return acc / weight;
        }
    }
    return 0.0;
}

/// Whether action selection sees the agent's biased action values or the plain expectation.
enum class SelectionValues { Biased, Unbiased };

inline std::array<double, kNumActions> action_values(const EmpiricalModel& m, const ValueTable& vt, int s,
                                                     const AgentParams& p,
                                                     SelectionValues mode = SelectionValues::Biased) {
    const BiasMode bias = mode == SelectionValues::Biased ? p.bias : BiasMode::Realistic;
    std::array<double, kNumActions> qs{};
    for (Action a : kAllActions) qs[action_index(a)] = q_value(m, vt, s, a, bias, p.gamma, p.exp_temperature);
    return qs;
}

// *******************************************************
// State value recomputation
// *******************************************************

/// New value of `s` from the current model and value table under `bias`.
/// Max-based modes range only over actions tried in `s`. Returns the initial
/// value of `s` if no action was ever taken there.
inline double recompute_value(const EmpiricalModel& m, const ValueTable& vt, int s, BiasMode bias, double gamma,
                              double exp_temperature = 1.0) {
    if (m.visit_count(s) == 0) return vt.initial(s);
    switch (bias) {
        case BiasMode::Realistic:
        case BiasMode::ExpWeighted: {
            double v = 0.0;
            for (Action a : kAllActions) {
                const double pa = m.policy_freq(s, a);
                if (pa > 0.0) v += pa * q_value(m, vt, s, a, bias, gamma, exp_temperature);
            }
            return v;
        }
        case BiasMode::ActionOptimistic: {
            double v = -std::numeric_limits<double>::infinity();
            for (Action a : kAllActions)
                if (m.action_count(s, a) > 0) v = std::max(v, q_value(m, vt, s, a, BiasMode::Realistic, gamma));
            return v;
        }
        case BiasMode::OutcomeOptimistic: {
            double v = -std::numeric_limits<double>::infinity();
            for (Action a : kAllActions)
                m.for_each_successor(s, a, [&](int n, double, double r) { v = std::max(v, r + gamma * vt.v(n)); });
            return v;
        }
    }
    return 0.0;
}

inline double recompute_value(const EmpiricalModel& m, const ValueTable& vt, int s, const AgentParams& p) {
    return recompute_value(m, vt, s, p.bias, p.gamma, p.exp_temperature);
}

/// Temporal-difference signal of a value recomputation.
inline constexpr double delta(double v_old, double v_new) noexcept { return v_new - v_old; }

/// Positive and negative pathway values of `s`, always computed with the
/// probability-weighted backup whatever the agent's bias. The positive part
/// backs up max(R, 0) over positive successor values, the negative part
/// min(R, 0) over negative successor values.
inline std::pair<double, double> update_signed_values(const EmpiricalModel& m, const ValueTable& vt, int s,
                                                      double gamma) {
    if (m.visit_count(s) == 0) return {vt.v_plus(s), vt.v_minus(s)};
    double plus = 0.0;
    double minus = 0.0;
    for (Action a : kAllActions) {
        const double pa = m.policy_freq(s, a);
        if (pa == 0.0) continue;
        m.for_each_successor(s, a, [&](int n, double p, double r) {
            plus += pa * p * (std::max(r, 0.0) + gamma * vt.v_plus(n));
            minus += pa * p * (std::min(r, 0.0) + gamma * vt.v_minus(n));
        });
    }
    return {std::max(plus, 0.0), std::min(minus, 0.0)};
}

}  // namespace riskrl

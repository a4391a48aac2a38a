#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "riskrl/rng.hpp"

namespace riskrl {

// *******************************************************
// Basic grid types
// *******************************************************

struct Coord {
    int x = 0;
    int y = 0;
    auto operator<=>(const Coord&) const = default;
};

/// Movement actions. y grows downward, so Up decreases y.
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::Up, Action::Down, Action::Left,
                                                            Action::Right};

inline constexpr int action_index(Action a) noexcept { return static_cast<int>(a); }

inline constexpr Coord move(Coord c, Action a) noexcept {
    switch (a) {
        case Action::Up: return {c.x, c.y - 1};
        case Action::Down: return {c.x, c.y + 1};
        case Action::Left: return {c.x - 1, c.y};
        case Action::Right: return {c.x + 1, c.y};
    }
    return c;
}

inline const char* action_name(Action a) noexcept {
    switch (a) {
        case Action::Up: return "up";
        case Action::Down: return "down";
        case Action::Left: return "left";
        case Action::Right: return "right";
    }
    return "?";
}

/// Thrown for task definitions that violate their invariants.
class TaskError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// *******************************************************
// Payoffs and task definitions
// *******************************************************

struct Outcome {
    std::string label;
    double probability = 1.0;
    double reward = 0.0;
};

/// Distribution over outcomes delivered when a goal holding this payoff is entered.
struct PayoffSpec {
    std::vector<Outcome> outcomes;

    static PayoffSpec deterministic(std::string label, double reward) {
        return PayoffSpec{{Outcome{std::move(label), 1.0, reward}}};
    }

    double expected_reward() const {
        double e = 0.0;
        for (const auto& o : outcomes) e += o.probability * o.reward;
        return e;
    }

    void validate() const {
        if (outcomes.empty()) throw TaskError("payoff has no outcomes");
        double total = 0.0;
        for (const auto& o : outcomes) {
            if (!(o.probability > 0.0 && o.probability <= 1.0))
                throw TaskError("outcome '" + o.label + "' has probability outside (0,1]");
            if (!std::isfinite(o.reward)) throw TaskError("outcome '" + o.label + "' has non-finite reward");
            total += o.probability;
        }
        if (std::abs(total - 1.0) > 1e-9) throw TaskError("payoff probabilities do not sum to 1");
    }
};

/// A named payoff, identified by its option letter (A, B, C).
struct Payoff {
    std::string option;
    PayoffSpec spec;
};

struct StepPunishment {
    Coord cell;
    double reward = 0.0;
};

/// Immutable description of one task. Cells are indexed by their position in
/// `cells`; goal slots are indexed by their position in `goal_slots`.
///
/// Successor nodes used by the learner are the cell indices [0, num_cells())
/// followed by one terminal node per (slot, payoff, outcome) triple.
class TaskSpec {
public:
    std::string name;
    std::vector<Coord> cells;
    std::vector<Coord> goal_slots;
    std::vector<Payoff> payoffs;
    /// slot -> payoff index, or -1 for an empty slot. For relocating tasks this
    /// only fixes how many payoffs exist; placement is randomized per trial.
    std::vector<int> initial_placement;
    std::vector<Coord> start_cells;
    bool forced_random_actions = false;
    bool relocating_payoffs = false;
    std::vector<StepPunishment> punishments;

    /// Validates invariants and builds lookup tables. Must be called after the
    /// public fields are filled in and before the spec is used.
    void finalize() {
        if (cells.empty()) throw TaskError("task '" + name + "' has no cells");
        index_.clear();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!index_.emplace(cells[i], static_cast<int>(i)).second)
                throw TaskError("task '" + name + "' lists a cell twice");
        }
        if (goal_slots.empty()) throw TaskError("task '" + name + "' has no goal cells");
        slot_of_cell_.assign(cells.size(), -1);
        for (std::size_t k = 0; k < goal_slots.size(); ++k) {
            const int c = cell_index(goal_slots[k]);
            if (c < 0) throw TaskError("goal cell outside the task's cells");
            if (slot_of_cell_[c] >= 0) throw TaskError("goal cell listed twice");
            slot_of_cell_[c] = static_cast<int>(k);
        }
        if (payoffs.empty()) throw TaskError("task '" + name + "' has no payoffs");
        for (const auto& p : payoffs) {
            if (p.option.empty()) throw TaskError("payoff without option label");
            p.spec.validate();
        }
        if (initial_placement.size() != goal_slots.size())
            throw TaskError("placement size does not match the number of goal cells");
        std::vector<int> used(payoffs.size(), 0);
        for (int p : initial_placement) {
            if (p < -1 || p >= static_cast<int>(payoffs.size())) throw TaskError("placement refers to unknown payoff");
            if (p >= 0) ++used[p];
        }
        if (relocating_payoffs) {
            for (int u : used)
                if (u != 1) throw TaskError("relocating task must place each payoff exactly once");
            if (payoffs.size() + 1 != goal_slots.size())
                throw TaskError("relocating task needs exactly one more goal cell than payoffs");
        } else {
            for (int p : initial_placement)
                if (p < 0) throw TaskError("static task has an empty goal cell");
        }
        if (start_cells.empty()) throw TaskError("task '" + name + "' has no start cells");
        start_index_.clear();
        for (const auto& s : start_cells) {
            const int c = cell_index(s);
            if (c < 0) throw TaskError("start cell outside the task's cells");
            if (slot_of_cell_[c] >= 0) throw TaskError("start cell coincides with a goal cell");
            start_index_.push_back(c);
        }
        punishment_.assign(cells.size(), 0.0);
        for (const auto& p : punishments) {
            const int c = cell_index(p.cell);
            if (c < 0) throw TaskError("punishment cell outside the task's cells");
            if (!std::isfinite(p.reward)) throw TaskError("non-finite punishment");
            punishment_[c] += p.reward;
        }
        check_connected();

        max_outcomes_ = 0;
        for (const auto& p : payoffs)
            max_outcomes_ = std::max(max_outcomes_, static_cast<int>(p.spec.outcomes.size()));
        terminal_.assign(num_nodes(), false);
        for (int n = num_cells(); n < num_nodes(); ++n) terminal_[n] = true;
        finalized_ = true;
    }

    bool finalized() const noexcept { return finalized_; }

    int num_cells() const noexcept { return static_cast<int>(cells.size()); }
    int num_nodes() const noexcept {
        return num_cells() + static_cast<int>(goal_slots.size() * payoffs.size()) * max_outcomes_;
    }

    /// Cell index of `c`, or -1 when `c` is not part of the task.
    int cell_index(Coord c) const {
        auto it = index_.find(c);
        return it == index_.end() ? -1 : it->second;
    }

    /// Goal slot at cell index `cell`, or -1.
    int slot_at(int cell) const noexcept { return slot_of_cell_[cell]; }
    bool is_goal_cell(int cell) const noexcept { return slot_of_cell_[cell] >= 0; }

    int terminal_node(int slot, int payoff, int outcome) const noexcept {
        return num_cells() + (slot * static_cast<int>(payoffs.size()) + payoff) * max_outcomes_ + outcome;
    }
    bool is_terminal(int node) const noexcept { return node >= num_cells(); }
    const std::vector<bool>& terminal_mask() const noexcept { return terminal_; }

    const std::vector<int>& start_indices() const noexcept { return start_index_; }
    double punishment_at(int cell) const noexcept { return punishment_[cell]; }

    int payoff_index(const std::string& option) const {
        for (std::size_t i = 0; i < payoffs.size(); ++i)
            if (payoffs[i].option == option) return static_cast<int>(i);
        return -1;
    }

    /// Cell index reached from `cell` by `a`, or `cell` itself for a blocked move.
    int neighbor(int cell, Action a) const {
        const int n = cell_index(move(cells[cell], a));
        return n < 0 ? cell : n;
    }

private:
    void check_connected() const {
        std::vector<char> seen(cells.size(), 0);
        std::vector<int> frontier{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const int c = frontier.back();
            frontier.pop_back();
            for (Action a : kAllActions) {
                const int n = cell_index(move(cells[c], a));
                if (n >= 0 && !seen[n]) {
                    seen[n] = 1;
                    ++reached;
                    frontier.push_back(n);
                }
            }
        }
        if (reached != cells.size()) throw TaskError("task '" + name + "' cells are not connected");
    }

    std::map<Coord, int> index_;
    std::vector<int> slot_of_cell_;
    std::vector<int> start_index_;
    std::vector<double> punishment_;
    std::vector<bool> terminal_;
    int max_outcomes_ = 0;
    bool finalized_ = false;
};

// *******************************************************
// Built-in tasks
// *******************************************************

/// Optional modifications applied on top of a built-in task.
struct TaskOverrides {
    /// option letter -> replacement payoff
    std::map<std::string, PayoffSpec> payoffs;
    /// reward of the third arm in the second-distracter variant
    std::optional<double> distracter_reward;
    /// reward for entering the cell adjacent to B in the pre-gamble variant
    std::optional<double> pre_gamble_punishment;
};

inline constexpr double kDefaultDistracterReward = 0.2;
inline constexpr double kDefaultPreGamblePunishment = -0.1;

namespace detail {

// Top bar of five cells with A at the far left and B at the far right, and a
// four-cell stem hanging below the centre junction.
inline std::vector<Coord> t_maze_cells() {
    return {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {2, 1}, {2, 2}, {2, 3}, {2, 4}};
}

// The T-maze plus a two-cell arm leaving the stem to the left at depth 2.
inline std::vector<Coord> three_arm_cells() {
    auto cells = t_maze_cells();
    cells.push_back({1, 2});
    cells.push_back({0, 2});
    return cells;
}

inline constexpr Coord kGoalA{0, 0};
inline constexpr Coord kGoalB{4, 0};
inline constexpr Coord kGoalC{0, 2};
inline constexpr Coord kBeforeB{3, 0};

inline std::vector<Coord> non_goal(const std::vector<Coord>& cells, const std::vector<Coord>& goals) {
    std::vector<Coord> out;
    for (const auto& c : cells)
        if (std::find(goals.begin(), goals.end(), c) == goals.end()) out.push_back(c);
    return out;
}

inline PayoffSpec gamble(double loss, double p_loss, double win, double p_win) {
    return PayoffSpec{{Outcome{"B1", p_loss, loss}, Outcome{"B2", p_win, win}}};
}

}  // namespace detail

inline const std::vector<std::string>& builtin_task_ids() {
    static const std::vector<std::string> ids{"trade_off",       "gambling",          "risky_world",
                                              "lack_of_control", "high_stakes",       "second_distracter",
                                              "pre_gamble_punishment"};
    return ids;
}

/// Builds one of the built-in tasks, applying `overrides` on top.
inline TaskSpec build_task(const std::string& id, const TaskOverrides& overrides = {}) {
    using namespace detail;
    TaskSpec t;
    t.name = id;
    const PayoffSpec a_pay = PayoffSpec::deterministic("A", 0.2);
    const PayoffSpec b_pay = PayoffSpec::deterministic("B", -0.1);
    const PayoffSpec gamble_pay = gamble(-0.2, 0.9, 0.8, 0.1);

    if (id == "trade_off" || id == "lack_of_control" || id == "gambling" || id == "high_stakes" ||
        id == "pre_gamble_punishment") {
        t.cells = t_maze_cells();
        t.goal_slots = {kGoalA, kGoalB};
        PayoffSpec b = b_pay;
        if (id == "gambling" || id == "pre_gamble_punishment") b = gamble_pay;
        if (id == "high_stakes") b = gamble(-2.0, 0.9, 17.0, 0.1);
        t.payoffs = {{"A", a_pay}, {"B", b}};
        t.initial_placement = {0, 1};
        t.forced_random_actions = id == "lack_of_control";
        if (id == "pre_gamble_punishment")
            t.punishments.push_back({kBeforeB, overrides.pre_gamble_punishment.value_or(kDefaultPreGamblePunishment)});
    } else if (id == "second_distracter") {
        t.cells = three_arm_cells();
        t.goal_slots = {kGoalA, kGoalB, kGoalC};
        t.payoffs = {{"A", a_pay},
                     {"B", gamble_pay},
                     {"C", PayoffSpec::deterministic("C", overrides.distracter_reward.value_or(kDefaultDistracterReward))}};
        t.initial_placement = {0, 1, 2};
    } else if (id == "risky_world") {
        t.cells = three_arm_cells();
        t.goal_slots = {kGoalA, kGoalB, kGoalC};
        t.payoffs = {{"A", a_pay}, {"B", b_pay}};
        t.initial_placement = {0, 1, -1};
        t.relocating_payoffs = true;
    } else {
        throw TaskError("unknown task id '" + id + "'");
    }

    for (const auto& [option, spec] : overrides.payoffs) {
        const int p = t.payoff_index(option);
        if (p < 0) throw TaskError("override for unknown option '" + option + "' in task '" + id + "'");
        spec.validate();
        t.payoffs[p].spec = spec;
    }
    t.start_cells = non_goal(t.cells, t.goal_slots);
    t.finalize();
    return t;
}

// *******************************************************
// Dynamics
// *******************************************************

struct WorldState {
    int agent_pos = 0;
    /// slot -> payoff index or -1
    std::vector<int> payoff_placement;
    long step_count = 0;
};

struct Consumption {
    int slot = -1;
    int payoff = -1;
    int outcome = -1;
};

struct StepResult {
    WorldState state;
    double reward = 0.0;
    /// the action actually executed (differs from the request under forced random actions)
    Action action = Action::Up;
    /// cell index entered, or the terminal node of a consumed outcome
    int successor = 0;
    std::optional<Consumption> consumed;
};

/// Uniform draw over the task's start cells.
inline int respawn(const TaskSpec& spec, RandomStream& rng) {
    const auto& starts = spec.start_indices();
    return starts[rng.uniform_index(starts.size())];
}

/// Moves the payoff consumed at `consumed_slot` to a uniformly chosen empty slot.
inline WorldState relocate_payoff(const TaskSpec& spec, WorldState state, int consumed_slot, RandomStream& rng) {
    if (!spec.relocating_payoffs) throw std::logic_error("relocate_payoff on a task without relocating payoffs");
    const int payoff = state.payoff_placement.at(consumed_slot);
    if (payoff < 0) throw std::logic_error("relocate_payoff on an empty slot");
    state.payoff_placement[consumed_slot] = -1;
    std::vector<int> empty;
    for (std::size_t k = 0; k < state.payoff_placement.size(); ++k)
        if (state.payoff_placement[k] < 0) empty.push_back(static_cast<int>(k));
    state.payoff_placement[empty[rng.uniform_index(empty.size())]] = payoff;
    return state;
}

/// Fresh state at the start of a trial: random start cell and, for relocating
/// tasks, a uniformly random placement of the payoffs over the slots.
inline WorldState initial_state(const TaskSpec& spec, RandomStream& rng) {
    WorldState s;
    s.payoff_placement = spec.initial_placement;
    if (spec.relocating_payoffs) {
        std::vector<int> order(spec.goal_slots.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_index(i + 1)]);
        std::fill(s.payoff_placement.begin(), s.payoff_placement.end(), -1);
        for (std::size_t p = 0; p < spec.payoffs.size(); ++p) s.payoff_placement[order[p]] = static_cast<int>(p);
    }
    s.agent_pos = respawn(spec, rng);
    return s;
}

inline int sample_outcome(const PayoffSpec& payoff, RandomStream& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < payoff.outcomes.size(); ++i) {
        acc += payoff.outcomes[i].probability;
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(payoff.outcomes.size()) - 1;
}

/// Advances the world by one action.
inline StepResult step(const TaskSpec& spec, const WorldState& state, Action action, RandomStream& rng) {
    StepResult r;
    r.state = state;
    r.state.step_count += 1;
    if (spec.forced_random_actions) action = kAllActions[rng.uniform_index(kNumActions)];
    r.action = action;

    const int target = spec.neighbor(state.agent_pos, action);
    if (target == state.agent_pos) {
        r.successor = target;
        return r;
    }
    r.reward = spec.punishment_at(target);
    const int slot = spec.slot_at(target);
    const int payoff = slot >= 0 ? state.payoff_placement[slot] : -1;
    if (payoff < 0) {
        r.state.agent_pos = target;
        r.successor = target;
        return r;
    }

    const int outcome = sample_outcome(spec.payoffs[payoff].spec, rng);
    r.reward += spec.payoffs[payoff].spec.outcomes[outcome].reward;
    r.consumed = Consumption{slot, payoff, outcome};
    r.successor = spec.terminal_node(slot, payoff, outcome);
    if (spec.relocating_payoffs) r.state = relocate_payoff(spec, std::move(r.state), slot, rng);
    r.state.agent_pos = respawn(spec, rng);
    return r;
}

}  // namespace riskrl

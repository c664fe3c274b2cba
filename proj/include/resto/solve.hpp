#pragma once

#include "resto/mdp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace resto {

/// Goal membership per state index.
using GoalSet = std::vector<bool>;

/// S^T: states with no restoration action.
inline GoalSet terminal_goal(const RestorationMdp& mdp) {
    GoalSet goal(mdp.size());
    for (std::size_t i = 0; i < mdp.size(); ++i) goal[i] = mdp.terminal(i);
    return goal;
}

/// True when some branch incident to `bus` is energized.
inline bool bus_energized(const Network& net, const SystemState& s, std::size_t bus) {
    for (BranchIndex j : net.incident(bus))
        if (s[j] == Status::E) return true;
    return false;
}

/**
 * S^{T,i} united with S^T: the target bus is energized, or the episode is
 * stuck. Dead ends must be absorbing or the expectation is undefined when
 * the target becomes unreachable.
 */
inline GoalSet target_bus_goal(const RestorationMdp& mdp, const Network& net, std::string_view bus_id) {
    auto bus = net.find_bus(bus_id);
    if (!bus) throw Error(ErrorCode::not_found, "unknown bus '" + std::string(bus_id) + "'", "/bus");
    GoalSet goal = terminal_goal(mdp);
    for (std::size_t i = 0; i < mdp.size(); ++i)
        if (bus_energized(net, mdp.state(i), *bus)) goal[i] = true;
    return goal;
}

/// Per-step cost: 0 on the goal, 1 elsewhere.
inline int cost(const RestorationMdp& mdp, std::size_t state, const GoalSet& goal) {
    if (state >= mdp.size() || goal.size() != mdp.size())
        throw Error(ErrorCode::invalid_argument, "state index or goal set does not match the MDP");
    return goal[state] ? 0 : 1;
}

struct Solution {
    /// Expected number of restoration steps to the goal.
    std::vector<double> value;
    /// Index into mdp.actions(i) of the optimal action; empty on goal states.
    std::vector<std::optional<std::size_t>> policy;
};

/// Values closer than this are treated as tied; ties go to the
/// lexicographically smallest action.
inline constexpr double tie_tolerance = 1e-12;

/**
 * Exact backward induction. The state graph is acyclic (each transition
 * resolves at least one U branch), so one pass over the states in
 * increasing U-count order computes the optimal values.
 */
inline Solution solve(const RestorationMdp& mdp, const GoalSet& goal) {
    if (goal.size() != mdp.size())
        throw Error(ErrorCode::invalid_argument, "goal set size does not match the MDP");
    Solution sol;
    sol.value.assign(mdp.size(), 0.0);
    sol.policy.assign(mdp.size(), std::nullopt);
    for (std::size_t i : unknown_count_order(mdp)) {
        if (goal[i]) continue;
        const auto acts = mdp.actions(i);
        if (acts.empty())
            throw Error(ErrorCode::unreachable_goal,
                        "state " + mdp.state(i).to_string() + " is not a goal state and has no actions");
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < acts.size(); ++k) {
            double q = 1.0;
            for (const Transition& t : mdp.transitions(i, k)) q += t.probability * sol.value[t.target];
            if (q < best - tie_tolerance) {
                best = q;
                best_k = k;
            }
        }
        sol.value[i] = best;
        sol.policy[i] = best_k;
    }
    return sol;
}

inline std::optional<Action> policy_action(const RestorationMdp& mdp, const Solution& sol, std::size_t state) {
    if (state >= sol.policy.size() || !sol.policy[state]) return std::nullopt;
    return mdp.actions(state)[*sol.policy[state]];
}

} // namespace resto

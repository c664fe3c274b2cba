#pragma once

#include "resto/fragility.hpp"
#include "resto/mdp.hpp"
#include "resto/network.hpp"
#include "resto/solve.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace resto {

enum class GoalKind { full_restoration, target_bus };

struct GoalMode {
    GoalKind kind = GoalKind::full_restoration;
    std::string bus; // target_bus only

    static GoalMode full() { return {}; }
    static GoalMode target(std::string bus) { return {GoalKind::target_bus, std::move(bus)}; }

    std::string to_string() const { return kind == GoalKind::full_restoration ? "full" : "target:" + bus; }

    friend bool operator==(const GoalMode&, const GoalMode&) = default;
};

/// Field report after closing the breakers of `action`: E or D per branch.
struct Observation {
    Action action;
    std::map<BranchIndex, Status> outcomes;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct WhatIf {
    SystemState successor;
    double remaining_steps = 0.0;
    std::optional<Action> next; // empty when the successor is a goal state
};

/**
 * A live restoration run. The MDP is built once per (network, P_F,
 * constraints); observations only move the current state along it.
 * Changing the goal re-solves on the same MDP.
 *
 * Not internally synchronized: callers serialize mutations.
 */
class Session {
public:
    static Session start(std::shared_ptr<const Network> net, FailureProfile p_f, ConstraintOptions constraints = {},
                         GoalMode goal = GoalMode::full(), bool simplify = true) {
        if (!net) throw Error(ErrorCode::invalid_argument, "null network");
        Session s;
        s.network_ = std::move(net);
        s.profile_ = std::move(p_f);
        s.constraints_ = std::move(constraints);
        BuildOptions build;
        build.constraints = s.constraints_;
        build.simplify = simplify;
        s.mdp_ = std::make_shared<const RestorationMdp>(build_mdp(*s.network_, s.profile_, build));
        s.set_goal(std::move(goal));
        return s;
    }

    const Network& network() const noexcept { return *network_; }
    const std::shared_ptr<const Network>& network_ptr() const noexcept { return network_; }
    const FailureProfile& profile() const noexcept { return profile_; }
    const ConstraintOptions& constraints() const noexcept { return constraints_; }
    const RestorationMdp& mdp() const noexcept { return *mdp_; }
    const Solution& solution() const noexcept { return solution_; }
    const GoalSet& goal() const noexcept { return goal_; }
    const GoalMode& goal_mode() const noexcept { return goal_mode_; }
    const std::vector<Observation>& history() const noexcept { return history_; }

    std::size_t current_index() const noexcept { return current_; }
    const SystemState& current_state() const { return mdp_->state(current_); }
    double current_value() const { return solution_.value[current_]; }
    bool at_goal() const { return goal_[current_]; }

    /// Optimal action in the current state; empty once the goal is reached.
    std::optional<Action> recommend() const { return policy_action(*mdp_, solution_, current_); }

    /**
     * Advance along the observed outcome. Any action of A'(s) is accepted,
     * not only the recommended one.
     */
    const SystemState& apply_observation(const Observation& obs) {
        current_ = successor(obs.action, obs.outcomes);
        history_.push_back(obs);
        return current_state();
    }

    /// Nominal trace: follow the policy assuming every branch energizes.
    std::vector<Action> expected_sequence() const {
        std::vector<Action> seq;
        std::size_t i = current_;
        while (auto a = policy_action(*mdp_, solution_, i)) {
            seq.push_back(*a);
            std::map<BranchIndex, Status> all_e;
            for (BranchIndex j : *a) all_e[j] = Status::E;
            auto next = mdp_->find(apply_outcomes(mdp_->state(i), all_e));
            // An all-E outcome with zero probability (some P_F = 1) is not
            // constructed; the nominal trace ends there.
            if (!next) break;
            i = *next;
        }
        return seq;
    }

    /// Read-only look-ahead over the solved table.
    WhatIf what_if(const Action& a, const std::map<BranchIndex, Status>& outcomes) const {
        const std::size_t t = successor(a, outcomes);
        return {mdp_->state(t), solution_.value[t], policy_action(*mdp_, solution_, t)};
    }

    /// Minimize expected steps until `bus` is energized (or the run is stuck).
    void retarget(const std::string& bus) { set_goal(GoalMode::target(bus)); }

    void set_goal(GoalMode goal) {
        GoalSet g = goal.kind == GoalKind::full_restoration ? terminal_goal(*mdp_)
                                                            : target_bus_goal(*mdp_, *network_, goal.bus);
        solution_ = solve(*mdp_, g);
        goal_ = std::move(g);
        goal_mode_ = std::move(goal);
    }

private:
    Session() = default;

    static SystemState apply_outcomes(SystemState s, const std::map<BranchIndex, Status>& outcomes) {
        for (const auto& [j, st] : outcomes) s.set(j, st);
        return s;
    }

    std::size_t successor(const Action& a, const std::map<BranchIndex, Status>& outcomes) const {
        for (const auto& [j, st] : outcomes) {
            if (!a.contains(j))
                throw Error(ErrorCode::infeasible, "outcome for branch " + std::to_string(j) + " which is not in action " +
                                                       a.to_string(),
                            "/outcomes/" + std::to_string(j));
            if (st == Status::U)
                throw Error(ErrorCode::schema, "outcome must be E or D", "/outcomes/" + std::to_string(j));
        }
        for (BranchIndex j : a)
            if (!outcomes.contains(j))
                throw Error(ErrorCode::infeasible, "missing outcome for branch " + std::to_string(j),
                            "/outcomes/" + std::to_string(j));
        auto k = mdp_->find_action(current_, a);
        if (!k)
            throw Error(ErrorCode::infeasible,
                        "action " + a.to_string() + " is not available in state " + current_state().to_string(),
                        "/action");
        const SystemState target = apply_outcomes(current_state(), outcomes);
        for (const Transition& t : mdp_->transitions(current_, *k))
            if (mdp_->state(t.target) == target) return t.target;
        throw Error(ErrorCode::infeasible,
                    "outcome " + target.to_string() + " has zero probability under the failure profile", "/outcomes");
    }

    std::shared_ptr<const Network> network_;
    FailureProfile profile_;
    ConstraintOptions constraints_;
    std::shared_ptr<const RestorationMdp> mdp_;
    GoalSet goal_;
    GoalMode goal_mode_;
    Solution solution_;
    std::size_t current_ = 0;
    std::vector<Observation> history_;
};

/// Rebuild a session by applying `history` from the all-U state.
inline Session replay(const std::vector<Observation>& history, std::shared_ptr<const Network> net, FailureProfile p_f,
                      ConstraintOptions constraints = {}, GoalMode goal = GoalMode::full(), bool simplify = true) {
    Session s = Session::start(std::move(net), std::move(p_f), std::move(constraints), std::move(goal), simplify);
    for (std::size_t i = 0; i < history.size(); ++i) {
        try {
            s.apply_observation(history[i]);
        } catch (const Error& e) {
            throw Error(e.code(), "history step " + std::to_string(i) + ": " + e.what(),
                        "/history/" + std::to_string(i) + e.field());
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Action& a) { return nlohmann::json(std::vector<BranchIndex>(a.begin(), a.end())); }

inline nlohmann::json to_json(const Observation& obs) {
    nlohmann::json outcomes = nlohmann::json::object();
    for (const auto& [j, st] : obs.outcomes) outcomes[std::to_string(j)] = std::string(1, to_char(st));
    return {{"action", to_json(obs.action)}, {"outcomes", std::move(outcomes)}};
}

inline Action parse_action(const nlohmann::json& doc, const std::string& path) {
    if (!doc.is_array() || doc.empty()) throw Error(ErrorCode::schema, "action must be a nonempty array of branch indices", path);
    std::vector<BranchIndex> v;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_number_unsigned())
            throw Error(ErrorCode::schema, "branch index must be a nonnegative integer", path + "/" + std::to_string(i));
        v.push_back(doc[i].get<BranchIndex>());
    }
    try {
        return Action(std::move(v));
    } catch (const Error& e) {
        throw Error(ErrorCode::schema, e.what(), path);
    }
}

/**
 * `{"action":[1,4],"outcomes":{"1":"D","4":"E"}}`. When "action" is absent
 * the action is the key set of "outcomes".
 */
inline Observation parse_observation(const nlohmann::json& doc, const std::string& path = "") {
    if (!doc.is_object()) throw Error(ErrorCode::schema, "observation must be an object", path);
    const auto& outcomes = detail::require(doc, "outcomes", path);
    if (!outcomes.is_object() || outcomes.empty())
        throw Error(ErrorCode::schema, "'outcomes' must be a nonempty object", path + "/outcomes");
    Observation obs;
    for (const auto& [key, v] : outcomes.items()) {
        const std::string p = path + "/outcomes/" + key;
        const BranchIndex j = detail::parse_branch_key(key, p);
        if (!v.is_string() || (v != "E" && v != "D")) throw Error(ErrorCode::schema, "outcome must be \"E\" or \"D\"", p);
        obs.outcomes[j] = status_from_char(v.get<std::string>()[0]);
    }
    if (auto it = doc.find("action"); it != doc.end()) {
        obs.action = parse_action(*it, path + "/action");
    } else {
        std::vector<BranchIndex> keys;
        for (const auto& [j, _] : obs.outcomes) keys.push_back(j);
        try {
            obs.action = Action(std::move(keys));
        } catch (const Error& e) {
            throw Error(ErrorCode::schema, e.what(), path + "/outcomes");
        }
    }
    return obs;
}

inline nlohmann::json to_json(const GoalMode& g) {
    if (g.kind == GoalKind::full_restoration) return {{"mode", "full"}};
    return {{"mode", "target"}, {"bus", g.bus}};
}

inline GoalMode parse_goal(const nlohmann::json& doc, const std::string& path = "") {
    const std::string mode = detail::require_string(doc, "mode", path);
    if (mode == "full") return GoalMode::full();
    if (mode == "target") return GoalMode::target(detail::require_string(doc, "bus", path));
    throw Error(ErrorCode::schema, "goal mode must be \"full\" or \"target\"", path + "/mode");
}

inline nlohmann::json to_json(const ConstraintOptions& c, bool simplify = true) {
    nlohmann::json out = {{"forbid_source_island_merge", c.forbid_source_island_merge}};
    if (!simplify) out["simplify"] = false;
    return out;
}

inline ConstraintOptions parse_constraints(const nlohmann::json& doc, const std::string& path = "") {
    ConstraintOptions c;
    if (!doc.is_object()) throw Error(ErrorCode::schema, "options must be an object", path);
    if (auto it = doc.find("forbid_source_island_merge"); it != doc.end()) {
        if (!it->is_boolean()) throw Error(ErrorCode::schema, "expected a boolean", path + "/forbid_source_island_merge");
        c.forbid_source_island_merge = it->get<bool>();
    }
    return c;
}

/// Session snapshot: everything needed to replay the run.
inline nlohmann::json to_json(const Session& s) {
    nlohmann::json history = nlohmann::json::array();
    for (const Observation& obs : s.history()) history.push_back(to_json(obs));
    return {{"network", to_json(s.network())},
            {"p_f", s.profile().values()},
            {"options", to_json(s.constraints(), s.mdp().simplified())},
            {"goal", to_json(s.goal_mode())},
            {"history", std::move(history)},
            {"current", s.current_state().to_string()}};
}

/// Replays a snapshot; the recorded current state must match the replay.
inline Session session_from_json(const nlohmann::json& doc, const ConstraintOptions& extra = {}) {
    auto net = std::make_shared<const Network>(load_network(detail::require(doc, "network", ""), "/network"));
    const auto& pf_doc = detail::require(doc, "p_f", "");
    if (!pf_doc.is_array()) throw Error(ErrorCode::schema, "'p_f' must be an array", "/p_f");
    std::vector<double> pf;
    for (std::size_t i = 0; i < pf_doc.size(); ++i) pf.push_back(detail::require_number(pf_doc[i], "/p_f/" + std::to_string(i)));
    ConstraintOptions constraints = extra;
    bool simplify = true;
    if (auto it = doc.find("options"); it != doc.end()) {
        constraints.forbid_source_island_merge = parse_constraints(*it, "/options").forbid_source_island_merge;
        if (auto f = it->find("simplify"); f != it->end()) {
            if (!f->is_boolean()) throw Error(ErrorCode::schema, "expected a boolean", "/options/simplify");
            simplify = f->get<bool>();
        }
    }
    GoalMode goal = GoalMode::full();
    if (auto it = doc.find("goal"); it != doc.end()) goal = parse_goal(*it, "/goal");
    std::vector<Observation> history;
    if (auto it = doc.find("history"); it != doc.end()) {
        if (!it->is_array()) throw Error(ErrorCode::schema, "'history' must be an array", "/history");
        for (std::size_t i = 0; i < it->size(); ++i)
            history.push_back(parse_observation((*it)[i], "/history/" + std::to_string(i)));
    }
    Session s = replay(history, std::move(net), FailureProfile(std::move(pf)), std::move(constraints), std::move(goal),
                       simplify);
    if (auto it = doc.find("current"); it != doc.end()) {
        if (!it->is_string() || it->get<std::string>() != s.current_state().to_string())
            throw Error(ErrorCode::schema, "recorded current state does not match the replayed history", "/current");
    }
    return s;
}

} // namespace resto

#pragma once

#include "resto/action.hpp"
#include "resto/error.hpp"
#include "resto/fragility.hpp"
#include "resto/network.hpp"
#include "resto/system_state.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace resto {

namespace detail {

// Lexicographic order on the sorted index lists encoded by two masks.
inline bool mask_less(std::uint64_t a, std::uint64_t b) {
    while (a != 0 && b != 0) {
        const int la = std::countr_zero(a);
        const int lb = std::countr_zero(b);
        if (la != lb) return la < lb;
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;
}

/**
 * Valid actions of `s` as masks, lexicographically ordered. With `simplify`
 * only the inclusion-maximal ones are returned.
 *
 * Depth-first over A^b(s) in index order; a partial set is extended only by
 * higher-index branches that keep it structurally compatible, so every
 * compatible set is visited once. Compatibility is downward closed, which
 * makes a one-branch extension test sufficient for maximality. The validity
 * hook need not be monotone, so with a hook the valid sets are collected and
 * filtered against each other instead.
 */
inline std::vector<std::uint64_t> action_masks(const Network& net, const SystemState& s,
                                               const ConstraintOptions& options, bool simplify) {
    const std::uint64_t feasible = feasible_branch_mask(net, s);
    if (feasible == 0) return {};

    std::vector<BranchIndex> candidates;
    for (std::uint64_t rest = feasible; rest != 0; rest &= rest - 1)
        candidates.push_back(static_cast<BranchIndex>(std::countr_zero(rest)));

    const DisjointSet base = energized_forest(net, s);
    auto compatible = [&](std::uint64_t set) { return structurally_compatible(net, base, set, options); };
    auto hook_ok = [&](std::uint64_t set) {
        return !options.state_valid || options.state_valid(net, energize(s, set));
    };
    const bool check_maximal_inline = simplify && !options.state_valid;

    std::vector<std::uint64_t> out;
    auto visit = [&](auto&& self, std::size_t start, std::uint64_t current) -> void {
        for (std::size_t i = start; i < candidates.size(); ++i) {
            const std::uint64_t next = current | (std::uint64_t{1} << candidates[i]);
            if (compatible(next)) self(self, i + 1, next);
        }
        if (current == 0 || !hook_ok(current)) return;
        if (check_maximal_inline) {
            for (BranchIndex j : candidates) {
                const std::uint64_t bit = std::uint64_t{1} << j;
                if ((current & bit) == 0 && compatible(current | bit)) return;
            }
        }
        out.push_back(current);
    };
    visit(visit, 0, 0);

    if (simplify && options.state_valid) {
        std::vector<std::uint64_t> maximal;
        for (std::uint64_t a : out) {
            const bool dominated = std::any_of(out.begin(), out.end(),
                                               [a](std::uint64_t b) { return b != a && (a & b) == a; });
            if (!dominated) maximal.push_back(a);
        }
        out = std::move(maximal);
    }
    std::sort(out.begin(), out.end(), mask_less);
    return out;
}

// Successors of energizing `action` in `s`: the last branch of the action
// varies fastest, all-E first. Zero-probability outcomes are dropped.
template <class Emit>
void for_each_outcome(const SystemState& s, std::span<const BranchIndex> action, const FailureProfile& p_f,
                      Emit&& emit) {
    const std::size_t k = action.size();
    const std::uint64_t count = std::uint64_t{1} << k;
    for (std::uint64_t outcome = 0; outcome < count; ++outcome) {
        SystemState t = s;
        double p = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const bool damaged = (outcome >> (k - 1 - i)) & 1u;
            const double pf = p_f[action[i]];
            p *= damaged ? pf : 1.0 - pf;
            t.set(action[i], damaged ? Status::D : Status::E);
        }
        if (p > 0.0) emit(t, p);
    }
}

} // namespace detail

/**
 * A(s) (or A'(s) when `simplify`): the valid branch sets in lexicographic
 * order. Empty means no restoration action is possible.
 */
inline std::vector<Action> enumerate_actions(const Network& net, const SystemState& s,
                                             const ConstraintOptions& options = {}, bool simplify = true) {
    check_state(net, s);
    std::vector<Action> out;
    for (std::uint64_t mask : detail::action_masks(net, s, options, simplify))
        out.push_back(Action::from_mask(mask));
    return out;
}

struct Successor {
    SystemState state;
    double probability = 0.0;
};

/// Distribution over successor states when `a` is applied in `s`.
inline std::vector<Successor> transition_distribution(const Network& net, const SystemState& s, const Action& a,
                                                      const FailureProfile& p_f,
                                                      const ConstraintOptions& options = {}) {
    if (p_f.size() != net.branch_count())
        throw Error(ErrorCode::invalid_argument, "failure profile length does not match the network");
    if (a.empty()) throw Error(ErrorCode::invalid_argument, "empty action");
    if (!action_valid(net, s, a, options))
        throw Error(ErrorCode::infeasible, "action " + a.to_string() + " is not applicable in " + s.to_string());
    std::vector<Successor> out;
    detail::for_each_outcome(s, a.branches(), p_f,
                             [&](const SystemState& t, double p) { out.push_back({t, p}); });
    return out;
}

struct Transition {
    std::size_t target = 0;
    double probability = 0.0;
};

struct BuildOptions {
    bool simplify = true;
    ConstraintOptions constraints;
    std::size_t state_cap = 5'000'000;
};

/**
 * The restoration MDP restricted to states reachable from all-U (index 0).
 * Actions and transitions are stored in compressed rows.
 */
class RestorationMdp {
public:
    std::size_t size() const noexcept { return states_.size(); }
    std::size_t branch_count() const noexcept { return branch_count_; }
    bool simplified() const noexcept { return simplified_; }

    const std::vector<SystemState>& states() const noexcept { return states_; }
    const SystemState& state(std::size_t i) const { return states_.at(i); }

    std::span<const Action> actions(std::size_t i) const {
        check(i);
        return std::span<const Action>(actions_).subspan(action_begin_[i], action_begin_[i + 1] - action_begin_[i]);
    }

    /// Transitions of the k-th action of state i.
    std::span<const Transition> transitions(std::size_t i, std::size_t k) const {
        const std::size_t a = global_action(i, k);
        return std::span<const Transition>(transitions_)
            .subspan(transition_begin_[a], transition_begin_[a + 1] - transition_begin_[a]);
    }

    /// No restoration action is possible.
    bool terminal(std::size_t i) const {
        check(i);
        return action_begin_[i] == action_begin_[i + 1];
    }

    std::optional<std::size_t> find(const SystemState& s) const {
        if (s.size() != branch_count_) return std::nullopt;
        auto it = index_.find(s.code());
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> find_action(std::size_t i, const Action& a) const {
        auto acts = actions(i);
        auto it = std::lower_bound(acts.begin(), acts.end(), a);
        if (it == acts.end() || *it != a) return std::nullopt;
        return static_cast<std::size_t>(it - acts.begin());
    }

    std::size_t action_count() const noexcept { return actions_.size(); }
    std::size_t transition_count() const noexcept { return transitions_.size(); }

private:
    friend RestorationMdp build_mdp(const Network&, const FailureProfile&, const BuildOptions&);

    void check(std::size_t i) const {
        if (i >= states_.size()) throw Error(ErrorCode::invalid_argument, "state index " + std::to_string(i) + " out of range");
    }

    std::size_t global_action(std::size_t i, std::size_t k) const {
        check(i);
        if (k >= action_begin_[i + 1] - action_begin_[i])
            throw Error(ErrorCode::invalid_argument, "action index " + std::to_string(k) + " out of range");
        return action_begin_[i] + k;
    }

    std::size_t branch_count_ = 0;
    bool simplified_ = true;
    std::vector<SystemState> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::size_t> action_begin_{0};
    std::vector<Action> actions_;
    std::vector<std::size_t> transition_begin_{0};
    std::vector<Transition> transitions_;
};

/**
 * Breadth-first reachability construction from the all-U state. Only states
 * reachable with positive probability are created; states are deduplicated
 * on their packed encoding.
 */
inline RestorationMdp build_mdp(const Network& net, const FailureProfile& p_f, const BuildOptions& options = {}) {
    if (p_f.size() != net.branch_count())
        throw Error(ErrorCode::invalid_argument, "failure profile has " + std::to_string(p_f.size()) +
                                                     " entries, network has " + std::to_string(net.branch_count()) +
                                                     " branches");
    RestorationMdp mdp;
    mdp.branch_count_ = net.branch_count();
    mdp.simplified_ = options.simplify;

    auto intern = [&](const SystemState& s) {
        auto [it, inserted] = mdp.index_.try_emplace(s.code(), mdp.states_.size());
        if (inserted) {
            if (mdp.states_.size() >= options.state_cap)
                throw Error(ErrorCode::limit_exceeded,
                            "state-count limit of " + std::to_string(options.state_cap) + " exceeded");
            mdp.states_.push_back(s);
        }
        return it->second;
    };

    intern(SystemState(net.branch_count()));
    for (std::size_t i = 0; i < mdp.states_.size(); ++i) {
        const SystemState s = mdp.states_[i];
        for (std::uint64_t mask : detail::action_masks(net, s, options.constraints, options.simplify)) {
            Action a = Action::from_mask(mask);
            detail::for_each_outcome(s, a.branches(), p_f, [&](const SystemState& t, double p) {
                mdp.transitions_.push_back({intern(t), p});
            });
            mdp.transition_begin_.push_back(mdp.transitions_.size());
            mdp.actions_.push_back(std::move(a));
        }
        mdp.action_begin_.push_back(mdp.actions_.size());
    }
    return mdp;
}

inline RestorationMdp build_mdp(const Network& net, const FailureProfile& p_f, bool simplify,
                                const ConstraintOptions& constraints = {}) {
    BuildOptions options;
    options.simplify = simplify;
    options.constraints = constraints;
    return build_mdp(net, p_f, options);
}

/// State indices ordered by increasing number of U branches. Every
/// transition strictly decreases that count, so this is a reverse
/// topological order of the state graph.
inline std::vector<std::size_t> unknown_count_order(const RestorationMdp& mdp) {
    std::vector<std::vector<std::size_t>> buckets(mdp.branch_count() + 1);
    for (std::size_t i = 0; i < mdp.size(); ++i) buckets[mdp.state(i).count(Status::U)].push_back(i);
    std::vector<std::size_t> order;
    order.reserve(mdp.size());
    for (const auto& bucket : buckets) order.insert(order.end(), bucket.begin(), bucket.end());
    return order;
}

struct MdpStats {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::size_t transitions = 0;
    std::size_t terminals = 0;
    std::size_t max_depth = 0; // longest action path from the initial state

    friend bool operator==(const MdpStats&, const MdpStats&) = default;
};

inline MdpStats mdp_stats(const RestorationMdp& mdp) {
    MdpStats st;
    st.states = mdp.size();
    st.actions = mdp.action_count();
    st.transitions = mdp.transition_count();
    std::vector<std::size_t> depth(mdp.size(), 0);
    const auto order = unknown_count_order(mdp);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t i = *it;
        if (mdp.terminal(i)) ++st.terminals;
        st.max_depth = std::max(st.max_depth, depth[i]);
        for (std::size_t k = 0; k < mdp.actions(i).size(); ++k)
            for (const Transition& t : mdp.transitions(i, k)) depth[t.target] = std::max(depth[t.target], depth[i] + 1);
    }
    return st;
}

inline std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

/**
 * Text dump, one record per state:
 *
 *     state <index> code=<packed> status=<UEDU..> terminal=<0|1>
 *       action {i,j} -> <target>:<probability> ...
 */
inline void dump_mdp(std::ostream& os, const RestorationMdp& mdp) {
    os << "# states=" << mdp.size() << " branches=" << mdp.branch_count() << " simplified=" << mdp.simplified() << '\n';
    for (std::size_t i = 0; i < mdp.size(); ++i) {
        const SystemState& s = mdp.state(i);
        os << "state " << i << " code=" << s.code() << " status=" << s.to_string() << " terminal=" << mdp.terminal(i)
           << '\n';
        const auto acts = mdp.actions(i);
        for (std::size_t k = 0; k < acts.size(); ++k) {
            os << "  action " << acts[k].to_string() << " ->";
            for (const Transition& t : mdp.transitions(i, k)) os << ' ' << t.target << ':' << format_probability(t.probability);
            os << '\n';
        }
    }
}

} // namespace resto

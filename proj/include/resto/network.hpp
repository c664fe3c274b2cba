#pragma once

#include "resto/action.hpp"
#include "resto/disjoint_set.hpp"
#include "resto/error.hpp"
#include "resto/system_state.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace resto {

enum class BusKind { load, transmission_source, der_source };

inline const char* to_string(BusKind kind) {
    switch (kind) {
    case BusKind::load: return "load";
    case BusKind::transmission_source: return "transmission_source";
    case BusKind::der_source: return "der_source";
    }
    return "load";
}

inline std::optional<BusKind> bus_kind_from_string(std::string_view s) {
    if (s == "load") return BusKind::load;
    if (s == "transmission_source") return BusKind::transmission_source;
    if (s == "der_source") return BusKind::der_source;
    return std::nullopt;
}

struct Bus {
    std::string id;
    BusKind kind = BusKind::load;

    bool is_source() const noexcept { return kind != BusKind::load; }
};

struct Branch {
    BranchIndex index = 0;
    std::array<std::string, 2> endpoints;
    bool normally_open = false;
};

/**
 * Static grid graph. Construction validates the document-level invariants and
 * precomputes the branch adjacency C(j) as bitmasks.
 */
class Network {
public:
    Network(std::vector<Bus> buses, std::vector<Branch> branches)
        : buses_(std::move(buses)), branches_(std::move(branches)) {
        validate_and_index();
    }

    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }
    std::size_t bus_count() const noexcept { return buses_.size(); }
    std::size_t branch_count() const noexcept { return branches_.size(); }

    std::optional<std::size_t> find_bus(std::string_view id) const {
        auto it = bus_index_.find(std::string(id));
        if (it == bus_index_.end()) return std::nullopt;
        return it->second;
    }

    /// Bus indices of the two ends of branch j.
    const std::array<std::size_t, 2>& ends(BranchIndex j) const { return ends_.at(j); }

    /// Branches incident to a bus.
    const std::vector<BranchIndex>& incident(std::size_t bus) const { return incident_.at(bus); }

    /// Bitmask of C(j).
    std::uint64_t neighbor_mask(BranchIndex j) const { return neighbors_.at(j); }

    bool source_adjacent_unchecked(BranchIndex j) const noexcept { return source_adjacent_[j]; }

    /// True when the graph with every branch closed is connected.
    bool connected() const noexcept { return connected_; }

    /// Non-fatal findings from validation (e.g. disconnected graph).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    void check_branch(BranchIndex j) const {
        if (j >= branches_.size())
            throw Error(ErrorCode::invalid_argument,
                        "branch index " + std::to_string(j) + " out of range (m = " +
                            std::to_string(branches_.size()) + ")");
    }

private:
    void validate_and_index();

    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::unordered_map<std::string, std::size_t> bus_index_;
    std::vector<std::array<std::size_t, 2>> ends_;
    std::vector<std::vector<BranchIndex>> incident_;
    std::vector<std::uint64_t> neighbors_;
    std::vector<bool> source_adjacent_;
    bool connected_ = true;
    std::vector<std::string> warnings_;
};

inline void Network::validate_and_index() {
    if (buses_.empty()) throw Error(ErrorCode::schema, "network has no buses", "/buses");
    bool any_source = false;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const std::string path = "/buses/" + std::to_string(i) + "/id";
        if (buses_[i].id.empty()) throw Error(ErrorCode::schema, "empty bus id", path);
        if (!bus_index_.emplace(buses_[i].id, i).second)
            throw Error(ErrorCode::schema, "duplicate bus id '" + buses_[i].id + "'", path);
        any_source = any_source || buses_[i].is_source();
    }
    if (!any_source) throw Error(ErrorCode::schema, "network has no source bus", "/buses");

    if (branches_.empty()) throw Error(ErrorCode::schema, "network has no branches", "/branches");
    if (branches_.size() > SystemState::max_branches)
        throw Error(ErrorCode::schema,
                    "at most " + std::to_string(SystemState::max_branches) + " branches are supported",
                    "/branches");

    // Indices must be exactly 0..m-1; accept any document order.
    std::vector<Branch> ordered(branches_.size());
    std::vector<bool> seen(branches_.size(), false);
    for (std::size_t pos = 0; pos < branches_.size(); ++pos) {
        const Branch& b = branches_[pos];
        const std::string path = "/branches/" + std::to_string(pos);
        if (b.index >= branches_.size())
            throw Error(ErrorCode::schema,
                        "branch indices must be contiguous 0.." + std::to_string(branches_.size() - 1) +
                            ", got " + std::to_string(b.index),
                        path + "/index");
        if (seen[b.index])
            throw Error(ErrorCode::schema, "duplicate branch index " + std::to_string(b.index), path + "/index");
        seen[b.index] = true;
        for (std::size_t e = 0; e < 2; ++e)
            if (!bus_index_.contains(b.endpoints[e]))
                throw Error(ErrorCode::schema, "dangling endpoint: unknown bus '" + b.endpoints[e] + "'",
                            path + "/endpoints/" + std::to_string(e));
        if (b.endpoints[0] == b.endpoints[1])
            throw Error(ErrorCode::schema, "branch endpoints must be distinct", path + "/endpoints");
        ordered[b.index] = b;
    }
    branches_ = std::move(ordered);

    const std::size_t m = branches_.size();
    ends_.resize(m);
    incident_.assign(buses_.size(), {});
    source_adjacent_.assign(m, false);
    for (BranchIndex j = 0; j < m; ++j) {
        for (std::size_t e = 0; e < 2; ++e) {
            const std::size_t bus = bus_index_.at(branches_[j].endpoints[e]);
            ends_[j][e] = bus;
            incident_[bus].push_back(j);
            if (buses_[bus].is_source()) source_adjacent_[j] = true;
        }
    }
    neighbors_.assign(m, 0);
    for (BranchIndex j = 0; j < m; ++j)
        for (std::size_t bus : ends_[j])
            for (BranchIndex k : incident_[bus])
                if (k != j) neighbors_[j] |= std::uint64_t{1} << k;

    DisjointSet all(buses_.size());
    std::size_t components = buses_.size();
    for (const auto& e : ends_)
        if (all.unite(e[0], e[1])) --components;
    connected_ = components == 1;
    if (!connected_)
        warnings_.push_back("network is not connected with all branches closed (" + std::to_string(components) +
                            " components)");
}

// ---------------------------------------------------------------------------
// Feasibility machinery
// ---------------------------------------------------------------------------

/// Extra per-state predicate (power-flow limits, DER capacity, ...).
using StateValidityHook = std::function<bool(const Network&, const SystemState&)>;

struct ConstraintOptions {
    /// Reject actions that join two distinct energized (E-branch) trees.
    bool forbid_source_island_merge = false;
    /// Evaluated on the state with every branch of the action energized.
    /// Empty means always valid.
    StateValidityHook state_valid;
};

inline std::vector<BranchIndex> connected_branches(const Network& net, BranchIndex j) {
    net.check_branch(j);
    std::vector<BranchIndex> out;
    std::uint64_t mask = net.neighbor_mask(j);
    for (BranchIndex k = 0; mask != 0; ++k, mask >>= 1)
        if (mask & 1u) out.push_back(k);
    return out;
}

inline bool source_adjacent(const Network& net, BranchIndex j) {
    net.check_branch(j);
    return net.source_adjacent_unchecked(j);
}

inline void check_state(const Network& net, const SystemState& s) {
    if (s.size() != net.branch_count())
        throw Error(ErrorCode::invalid_argument,
                    "state has " + std::to_string(s.size()) + " entries, network has " +
                        std::to_string(net.branch_count()) + " branches");
}

/// A^b(s) as a bitmask: U branches that touch a source bus or an E branch.
inline std::uint64_t feasible_branch_mask(const Network& net, const SystemState& s) {
    const std::uint64_t energized = s.mask(Status::E);
    std::uint64_t out = 0;
    for (BranchIndex j = 0; j < net.branch_count(); ++j) {
        if (s[j] != Status::U) continue;
        if (net.source_adjacent_unchecked(j) || (net.neighbor_mask(j) & energized) != 0)
            out |= std::uint64_t{1} << j;
    }
    return out;
}

inline std::vector<BranchIndex> feasible_branch_actions(const Network& net, const SystemState& s) {
    check_state(net, s);
    std::vector<BranchIndex> out;
    std::uint64_t mask = feasible_branch_mask(net, s);
    for (BranchIndex j = 0; mask != 0; ++j, mask >>= 1)
        if (mask & 1u) out.push_back(j);
    return out;
}

/// Buses joined by the E branches of `s`; roots touched by an E branch are marked.
inline DisjointSet energized_forest(const Network& net, const SystemState& s) {
    DisjointSet forest(net.bus_count());
    for (BranchIndex k = 0; k < net.branch_count(); ++k) {
        if (s[k] != Status::E) continue;
        const auto& e = net.ends(k);
        forest.unite(e[0], e[1]);
        forest.mark(e[0]);
    }
    return forest;
}

/**
 * Constraint check for a candidate set (as a mask) already known to lie in
 * A^b(s): pairwise electrical distance, acyclicity of the union with the
 * current E forest, and the optional island-merge rule. `forest` is the
 * energized forest of s and is taken by value because the check extends it.
 * The validity hook is not evaluated here.
 */
inline bool structurally_compatible(const Network& net, DisjointSet forest, std::uint64_t candidate,
                                    const ConstraintOptions& options) {
    for (std::uint64_t rest = candidate; rest != 0; rest &= rest - 1) {
        const BranchIndex j = static_cast<BranchIndex>(std::countr_zero(rest));
        if ((net.neighbor_mask(j) & candidate) != 0) return false;
    }
    for (std::uint64_t rest = candidate; rest != 0; rest &= rest - 1) {
        const BranchIndex j = static_cast<BranchIndex>(std::countr_zero(rest));
        const auto& e = net.ends(j);
        const std::size_t a = forest.find(e[0]);
        const std::size_t b = forest.find(e[1]);
        if (a == b) return false;
        if (options.forbid_source_island_merge && forest.marked(a) && forest.marked(b)) return false;
        forest.unite(a, b);
        forest.mark(a);
    }
    return true;
}

/// State after energizing every branch of `candidate`.
inline SystemState energize(SystemState s, std::uint64_t candidate) {
    for (; candidate != 0; candidate &= candidate - 1)
        s.set(static_cast<BranchIndex>(std::countr_zero(candidate)), Status::E);
    return s;
}

/**
 * Whether the set `a` may be energized together in `s`. Throws when `a` is
 * not a subset of A^b(s). The loop check runs on the whole set: two
 * non-adjacent branches can jointly close a loop between two energized trees.
 */
inline bool action_valid(const Network& net, const SystemState& s, std::span<const BranchIndex> a,
                         const ConstraintOptions& options = {}) {
    check_state(net, s);
    if (a.empty()) throw Error(ErrorCode::invalid_argument, "empty branch set");
    const std::uint64_t feasible = feasible_branch_mask(net, s);
    std::uint64_t candidate = 0;
    for (BranchIndex j : a) {
        net.check_branch(j);
        if (((feasible >> j) & 1u) == 0)
            throw Error(ErrorCode::infeasible, "branch " + std::to_string(j) + " is not in A^b(s) for s = " +
                                                   s.to_string());
        if ((candidate >> j) & 1u) throw Error(ErrorCode::invalid_argument, "duplicate branch in set");
        candidate |= std::uint64_t{1} << j;
    }
    if (!structurally_compatible(net, energized_forest(net, s), candidate, options)) return false;
    return !options.state_valid || options.state_valid(net, energize(s, candidate));
}

inline bool action_valid(const Network& net, const SystemState& s, const Action& a,
                         const ConstraintOptions& options = {}) {
    return action_valid(net, s, a.branches(), options);
}

/**
 * Reachable-state invariant: E branches form a forest and every tree
 * touches a source bus.
 */
inline bool energized_forest_ok(const Network& net, const SystemState& s) {
    check_state(net, s);
    DisjointSet forest(net.bus_count());
    for (BranchIndex k = 0; k < net.branch_count(); ++k) {
        if (s[k] != Status::E) continue;
        if (!forest.unite(net.ends(k)[0], net.ends(k)[1])) return false;
    }
    for (std::size_t b = 0; b < net.bus_count(); ++b)
        if (net.buses()[b].is_source()) forest.mark(b);
    for (BranchIndex k = 0; k < net.branch_count(); ++k)
        if (s[k] == Status::E && !forest.marked(net.ends(k)[0])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Network document
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw Error(ErrorCode::schema, "expected an object", path);
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::schema, std::string("missing field '") + key + "'", path + "/" + key);
    return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_string()) throw Error(ErrorCode::schema, std::string("'") + key + "' must be a string", path + "/" + key);
    return v.get<std::string>();
}

inline nlohmann::json parse_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::malformed, std::string("invalid JSON: ") + e.what());
    }
}

} // namespace detail

inline Network load_network(const nlohmann::json& doc, const std::string& path = "") {
    const auto& buses_doc = detail::require(doc, "buses", path);
    const auto& branches_doc = detail::require(doc, "branches", path);
    if (!buses_doc.is_array()) throw Error(ErrorCode::schema, "'buses' must be an array", path + "/buses");
    if (!branches_doc.is_array()) throw Error(ErrorCode::schema, "'branches' must be an array", path + "/branches");

    std::vector<Bus> buses;
    for (std::size_t i = 0; i < buses_doc.size(); ++i) {
        const std::string p = path + "/buses/" + std::to_string(i);
        Bus bus;
        bus.id = detail::require_string(buses_doc[i], "id", p);
        const std::string kind = detail::require_string(buses_doc[i], "kind", p);
        auto parsed = bus_kind_from_string(kind);
        if (!parsed) throw Error(ErrorCode::schema, "unknown bus kind '" + kind + "'", p + "/kind");
        bus.kind = *parsed;
        buses.push_back(std::move(bus));
    }

    std::vector<Branch> branches;
    for (std::size_t i = 0; i < branches_doc.size(); ++i) {
        const std::string p = path + "/branches/" + std::to_string(i);
        const auto& b = branches_doc[i];
        Branch branch;
        const auto& index = detail::require(b, "index", p);
        if (!index.is_number_unsigned()) throw Error(ErrorCode::schema, "'index' must be a nonnegative integer", p + "/index");
        branch.index = index.get<BranchIndex>();
        const auto& ends = detail::require(b, "endpoints", p);
        if (!ends.is_array() || ends.size() != 2 || !ends[0].is_string() || !ends[1].is_string())
            throw Error(ErrorCode::schema, "'endpoints' must be a pair of bus ids", p + "/endpoints");
        branch.endpoints = {ends[0].get<std::string>(), ends[1].get<std::string>()};
        if (auto it = b.find("normally_open"); it != b.end()) {
            if (!it->is_boolean()) throw Error(ErrorCode::schema, "'normally_open' must be a boolean", p + "/normally_open");
            branch.normally_open = it->get<bool>();
        }
        branches.push_back(std::move(branch));
    }

    try {
        return Network(std::move(buses), std::move(branches));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::schema && !path.empty()) throw Error(e.code(), e.what(), path + e.field());
        throw;
    }
}

/// Parses and validates a network document given as text.
inline Network parse_network(std::string_view text) { return load_network(detail::parse_json(text)); }

inline nlohmann::json to_json(const Network& net) {
    nlohmann::json buses = nlohmann::json::array();
    for (const Bus& b : net.buses()) buses.push_back({{"id", b.id}, {"kind", to_string(b.kind)}});
    nlohmann::json branches = nlohmann::json::array();
    for (const Branch& b : net.branches())
        branches.push_back({{"index", b.index},
                            {"endpoints", {b.endpoints[0], b.endpoints[1]}},
                            {"normally_open", b.normally_open}});
    return {{"buses", std::move(buses)}, {"branches", std::move(branches)}};
}

} // namespace resto

#pragma once

#include "resto/fragility.hpp"
#include "resto/network.hpp"
#include "resto/planner.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace resto {

/// Everything needed to open a session: grid, damage probabilities, goal.
struct Scenario {
    std::shared_ptr<const Network> network;
    FailureProfile p_f;
    ConstraintOptions options;
    GoalMode goal;
    std::vector<Observation> history; // applied on top of the all-U start
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/**
 * Scenario document:
 *
 *     {"network": {...} | "network_file": "grid.json",
 *      "fragility": {"overrides": {"0": 0.2}, "curves": {...}, "pga": {...}},
 *      "options": {"forbid_source_island_merge": false},
 *      "goal": {"mode": "target", "bus": "b6"},
 *      "history": [{"action": [0], "outcomes": {"0": "E"}}]}
 *
 * `network_file` is resolved against `base_dir` and rejected without one.
 */
inline Scenario load_scenario(const nlohmann::json& doc, const std::optional<std::filesystem::path>& base_dir = {}) {
    if (!doc.is_object()) throw Error(ErrorCode::schema, "scenario must be an object", "");
    Scenario sc;
    if (auto it = doc.find("network"); it != doc.end()) {
        sc.network = std::make_shared<const Network>(load_network(*it, "/network"));
    } else if (auto f = doc.find("network_file"); f != doc.end()) {
        if (!f->is_string()) throw Error(ErrorCode::schema, "'network_file' must be a string", "/network_file");
        if (!base_dir) throw Error(ErrorCode::schema, "'network_file' is not accepted here; inline the network", "/network_file");
        const auto path = *base_dir / f->get<std::string>();
        try {
            sc.network = std::make_shared<const Network>(load_network(detail::parse_json(read_text_file(path))));
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ": " + e.what(), "/network_file");
        }
    } else {
        throw Error(ErrorCode::schema, "scenario needs 'network' or 'network_file'", "/network");
    }
    const auto& frag = detail::require(doc, "fragility", "");
    try {
        sc.p_f = failure_profile(*sc.network, parse_fragility(frag, "/fragility"));
    } catch (const Error& e) {
        if (e.field().rfind("/fragility", 0) == 0) throw;
        throw Error(e.code(), e.what(), "/fragility" + e.field());
    }
    if (auto it = doc.find("options"); it != doc.end()) sc.options = parse_constraints(*it, "/options");
    if (auto it = doc.find("goal"); it != doc.end()) sc.goal = parse_goal(*it, "/goal");
    if (auto it = doc.find("history"); it != doc.end()) {
        if (!it->is_array()) throw Error(ErrorCode::schema, "'history' must be an array", "/history");
        for (std::size_t i = 0; i < it->size(); ++i)
            sc.history.push_back(parse_observation((*it)[i], "/history/" + std::to_string(i)));
    }
    return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    return load_scenario(detail::parse_json(text), path.parent_path());
}

inline Session start_session(const Scenario& sc, bool simplify = true) {
    return replay(sc.history, sc.network, sc.p_f, sc.options, sc.goal, simplify);
}

} // namespace resto

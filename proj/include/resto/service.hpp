#pragma once

#include "resto/planner.hpp"
#include "resto/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace resto {

namespace service {

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

inline int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::malformed: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::infeasible: return 409;
    case ErrorCode::schema:
    case ErrorCode::invalid_argument:
    case ErrorCode::limit_exceeded:
    case ErrorCode::unreachable_goal: return 422;
    }
    return 500;
}

inline Response error_response(int status, std::string_view code, std::string_view field, std::string_view message) {
    return {status, {{"error", {{"code", code}, {"field", field}, {"message", message}}}}};
}

inline Response error_response(const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.field(), e.what());
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// 128 random bits as 32 hex digits.
inline std::string random_session_id() {
    static std::mutex mu;
    static std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::uint64_t hi = 0, lo = 0;
    {
        std::lock_guard lock(mu);
        hi = rng();
        lo = rng();
    }
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

struct SessionRecord {
    std::string id;
    std::string created;
    std::string updated;
    Session session;
    mutable std::shared_mutex mu;

    SessionRecord(std::string id_, std::string created_, std::string updated_, Session s)
        : id(std::move(id_)), created(std::move(created_)), updated(std::move(updated_)), session(std::move(s)) {}

    nlohmann::json to_file_json() const {
        return {{"id", id}, {"created", created}, {"updated", updated}, {"snapshot", to_json(session)}};
    }
};

/// Writes `data` next to `path`, then renames over it.
inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << data;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/**
 * In-memory sessions with optional one-file-per-session persistence.
 * Per-session mutations hold the record's exclusive lock; reads share it.
 */
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> dir = {}) : dir_(std::move(dir)) {
        if (dir_) {
            std::filesystem::create_directories(*dir_);
            load_all();
        }
    }

    std::shared_ptr<SessionRecord> create(Session s) {
        const std::string now = utc_timestamp();
        auto rec = std::make_shared<SessionRecord>(random_session_id(), now, now, std::move(s));
        persist(*rec);
        std::unique_lock lock(mu_);
        sessions_[rec->id] = rec;
        return rec;
    }

    std::shared_ptr<SessionRecord> find(const std::string& id) const {
        std::shared_lock lock(mu_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return sessions_.size();
    }

    /// Call with the record's exclusive lock held.
    void persist(SessionRecord& rec) {
        if (!dir_) return;
        atomic_write(*dir_ / (rec.id + ".json"), rec.to_file_json().dump(2) + "\n");
    }

    const std::vector<std::filesystem::path>& quarantined() const noexcept { return quarantined_; }
    const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

private:
    void load_all() {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(*dir_))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            try {
                const auto doc = detail::parse_json(read_text_file(file));
                const std::string id = detail::require_string(doc, "id", "");
                if (file.stem() != id) throw Error(ErrorCode::schema, "file name does not match session id", "/id");
                Session s = session_from_json(detail::require(doc, "snapshot", ""));
                const std::string created = doc.value("created", utc_timestamp());
                const std::string updated = doc.value("updated", created);
                sessions_[id] = std::make_shared<SessionRecord>(id, created, updated, std::move(s));
            } catch (const std::exception& e) {
                quarantine(file, e.what());
            }
        }
    }

    void quarantine(const std::filesystem::path& file, const std::string& reason) {
        const auto qdir = *dir_ / "quarantine";
        std::filesystem::create_directories(qdir);
        const auto target = qdir / file.filename();
        std::error_code ec;
        std::filesystem::rename(file, target, ec);
        std::cerr << "resto: quarantined session file " << file.filename().string() << ": " << reason << '\n';
        quarantined_.push_back(ec ? file : target);
    }

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<SessionRecord>> sessions_;
    std::vector<std::filesystem::path> quarantined_;
};

inline nlohmann::json action_json(const std::optional<Action>& a) {
    return a ? to_json(*a) : nlohmann::json(nullptr);
}

inline nlohmann::json session_view(const SessionRecord& rec) {
    const Session& s = rec.session;
    nlohmann::json history = nlohmann::json::array();
    for (const Observation& obs : s.history()) history.push_back(to_json(obs));
    nlohmann::json sequence = nlohmann::json::array();
    for (const Action& a : s.expected_sequence()) sequence.push_back(to_json(a));
    const auto rec_action = s.recommend();
    return {{"id", rec.id},
            {"state", s.current_state().to_string()},
            {"value", s.current_value()},
            {"recommendation", action_json(rec_action)},
            {"terminal", !rec_action.has_value()},
            {"goal", to_json(s.goal_mode())},
            {"expected_sequence", std::move(sequence)},
            {"history", std::move(history)},
            {"created", rec.created},
            {"updated", rec.updated}};
}

/// Splits "a,b,c"; empty input yields no items.
inline std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline BranchIndex parse_index(std::string_view text, const std::string& field) {
    BranchIndex v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw Error(ErrorCode::malformed, "'" + std::string(text) + "' is not a branch index", field);
    return v;
}

/// `action=0,5&outcomes=0:D,5:E`
inline std::pair<Action, std::map<BranchIndex, Status>> parse_whatif_query(const std::map<std::string, std::string>& q) {
    auto a = q.find("action");
    if (a == q.end()) throw Error(ErrorCode::malformed, "missing query parameter 'action'", "action");
    auto o = q.find("outcomes");
    if (o == q.end()) throw Error(ErrorCode::malformed, "missing query parameter 'outcomes'", "outcomes");
    std::vector<BranchIndex> branches;
    for (auto part : split(a->second, ',')) branches.push_back(parse_index(part, "action"));
    Action action;
    try {
        action = Action(std::move(branches));
    } catch (const Error& e) {
        throw Error(ErrorCode::malformed, e.what(), "action");
    }
    std::map<BranchIndex, Status> outcomes;
    for (auto part : split(o->second, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string_view::npos || part.size() != colon + 2 || (part[colon + 1] != 'E' && part[colon + 1] != 'D'))
            throw Error(ErrorCode::malformed, "outcome '" + std::string(part) + "' must look like <branch>:<E|D>", "outcomes");
        outcomes[parse_index(part.substr(0, colon), "outcomes")] = status_from_char(part[colon + 1]);
    }
    return {std::move(action), std::move(outcomes)};
}

/**
 * Routes JSON requests to sessions. Transport-independent; see http.hpp
 * for the socket binding.
 */
class Service {
public:
    explicit Service(std::optional<std::filesystem::path> state_dir = {}) : store_(std::move(state_dir)) {}

    SessionStore& store() noexcept { return store_; }
    const SessionStore& store() const noexcept { return store_; }

    Response handle(const Request& req) {
        try {
            return route(req);
        } catch (const Error& e) {
            return error_response(e);
        } catch (const std::exception& e) {
            return error_response(500, "internal", "", e.what());
        }
    }

private:
    Response route(const Request& req) {
        const auto parts = split(std::string_view(req.path).substr(req.path.empty() ? 0 : 1), '/');
        const auto& m = req.method;
        if (parts.size() == 1 && parts[0] == "healthz") {
            if (m != "GET") return method_not_allowed();
            return {200, {{"status", "ok"}, {"sessions", store_.size()}}};
        }
        if (parts.empty() || parts[0] != "sessions") return unknown_route(req);
        if (parts.size() == 1) {
            if (m != "POST") return method_not_allowed();
            return create(req);
        }
        auto rec = store_.find(std::string(parts[1]));
        if (!rec) return error_response(404, "not_found", "id", "unknown session '" + std::string(parts[1]) + "'");
        if (parts.size() == 2) {
            if (m != "GET") return method_not_allowed();
            std::shared_lock lock(rec->mu);
            return {200, session_view(*rec)};
        }
        if (parts.size() == 3 && parts[2] == "observations") {
            if (m != "POST") return method_not_allowed();
            return observe(*rec, req);
        }
        if (parts.size() == 3 && parts[2] == "whatif") {
            if (m != "GET") return method_not_allowed();
            return what_if(*rec, req);
        }
        if (parts.size() == 3 && parts[2] == "retarget") {
            if (m != "POST") return method_not_allowed();
            return retarget(*rec, req);
        }
        if (parts.size() == 4 && parts[2] == "mdp" && parts[3] == "stats") {
            if (m != "GET") return method_not_allowed();
            std::shared_lock lock(rec->mu);
            return {200, stats_json(rec->session.mdp())};
        }
        return unknown_route(req);
    }

    static Response unknown_route(const Request& req) {
        return error_response(404, "not_found", "", "no route for " + req.method + " " + req.path);
    }

    static Response method_not_allowed() { return error_response(405, "method_not_allowed", "", "method not allowed"); }

    Response create(const Request& req) {
        const Scenario sc = load_scenario(detail::parse_json(req.body));
        auto rec = store_.create(start_session(sc));
        std::shared_lock lock(rec->mu);
        return {201, session_view(*rec)};
    }

    Response observe(SessionRecord& rec, const Request& req) {
        const Observation obs = parse_observation(detail::parse_json(req.body));
        std::unique_lock lock(rec.mu);
        // Work on a copy so a failed write leaves memory and disk in agreement.
        Session next = rec.session;
        next.apply_observation(obs);
        std::swap(rec.session, next);
        const std::string previous = std::exchange(rec.updated, utc_timestamp());
        try {
            store_.persist(rec);
        } catch (...) {
            std::swap(rec.session, next);
            rec.updated = previous;
            throw;
        }
        return {200, session_view(rec)};
    }

    Response what_if(const SessionRecord& rec, const Request& req) const {
        const auto [action, outcomes] = parse_whatif_query(req.query);
        std::shared_lock lock(rec.mu);
        const WhatIf w = rec.session.what_if(action, outcomes);
        return {200,
                {{"successor", w.successor.to_string()},
                 {"remaining_steps", w.remaining_steps},
                 {"next", action_json(w.next)},
                 {"terminal", !w.next.has_value()}}};
    }

    Response retarget(SessionRecord& rec, const Request& req) {
        const auto doc = detail::parse_json(req.body);
        if (!doc.is_object()) throw Error(ErrorCode::schema, "body must be an object", "");
        GoalMode goal = doc.contains("mode") ? parse_goal(doc) : GoalMode::target(detail::require_string(doc, "bus", ""));
        std::unique_lock lock(rec.mu);
        Session next = rec.session;
        next.set_goal(std::move(goal));
        std::swap(rec.session, next);
        const std::string previous = std::exchange(rec.updated, utc_timestamp());
        try {
            store_.persist(rec);
        } catch (...) {
            std::swap(rec.session, next);
            rec.updated = previous;
            throw;
        }
        return {200, session_view(rec)};
    }

    static nlohmann::json stats_json(const RestorationMdp& mdp) {
        const MdpStats st = mdp_stats(mdp);
        return {{"states", st.states},       {"actions", st.actions},   {"transitions", st.transitions},
                {"terminals", st.terminals}, {"max_depth", st.max_depth}, {"branches", mdp.branch_count()},
                {"simplified", mdp.simplified()}};
    }

    SessionStore store_;
};

} // namespace service

} // namespace resto

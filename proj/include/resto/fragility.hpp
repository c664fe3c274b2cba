#pragma once

#include "resto/error.hpp"
#include "resto/network.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace resto {

/// Standard normal CDF.
inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Lognormal complete-damage fragility curve over PGA (in g).
struct FragilityCurve {
    double median_pga = 1.0;
    double beta = 0.5;

    void validate(const std::string& path = "") const {
        if (!(median_pga > 0.0) || !std::isfinite(median_pga))
            throw Error(ErrorCode::schema, "median_pga must be positive", path + "/median_pga");
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw Error(ErrorCode::schema, "beta must be positive", path + "/beta");
    }
};

/// Probability that PGA `pga` drives the structure into complete damage.
inline double evaluate_fragility(const FragilityCurve& curve, double pga) {
    curve.validate();
    if (!(pga >= 0.0) || !std::isfinite(pga))
        throw Error(ErrorCode::invalid_argument, "pga must be a finite nonnegative acceleration");
    if (pga == 0.0) return 0.0;
    return standard_normal_cdf(std::log(pga / curve.median_pga) / curve.beta);
}

struct PgaRecord {
    std::string station_id;
    double pga = 0.0;
    std::optional<std::pair<double, double>> location; // (lat, lon)
};

/// How each branch gets its PGA: a direct value, a named station, or the default.
struct PgaMapping {
    std::map<BranchIndex, double> direct;
    std::map<BranchIndex, std::string> branch_station;
    std::optional<double> default_pga;
};

namespace detail {

inline std::optional<double> resolve_branch_pga(std::span<const PgaRecord> records, const PgaMapping& mapping,
                                                BranchIndex j) {
    if (auto it = mapping.direct.find(j); it != mapping.direct.end()) return it->second;
    if (auto it = mapping.branch_station.find(j); it != mapping.branch_station.end()) {
        for (const PgaRecord& r : records)
            if (r.station_id == it->second) return r.pga;
        throw Error(ErrorCode::schema, "unknown station id '" + it->second + "'",
                    "/pga/branch_station/" + std::to_string(j));
    }
    return mapping.default_pga;
}

} // namespace detail

/// Per-branch PGA. Every branch must resolve.
inline std::vector<double> assign_pga(std::span<const PgaRecord> records, const Network& net,
                                      const PgaMapping& mapping) {
    for (const PgaRecord& r : records)
        if (!(r.pga >= 0.0)) throw Error(ErrorCode::schema, "station '" + r.station_id + "' has negative pga");
    std::vector<double> out(net.branch_count());
    for (BranchIndex j = 0; j < net.branch_count(); ++j) {
        auto pga = detail::resolve_branch_pga(records, mapping, j);
        if (!pga)
            throw Error(ErrorCode::schema, "branch " + std::to_string(j) + " has no PGA (no direct value, station or default)",
                        "/pga/direct/" + std::to_string(j));
        out[j] = *pga;
    }
    return out;
}

/// Per-branch damage probabilities P_F.
class FailureProfile {
public:
    FailureProfile() = default;

    explicit FailureProfile(std::vector<double> p_f) : p_f_(std::move(p_f)) {
        for (std::size_t i = 0; i < p_f_.size(); ++i)
            if (!(p_f_[i] >= 0.0 && p_f_[i] <= 1.0))
                throw Error(ErrorCode::schema, "P_F(" + std::to_string(i) + ") must lie in [0,1]",
                            "/p_f/" + std::to_string(i));
    }

    static FailureProfile uniform(std::size_t m, double p) { return FailureProfile(std::vector<double>(m, p)); }

    double operator[](BranchIndex i) const { return p_f_.at(i); }
    std::size_t size() const noexcept { return p_f_.size(); }
    const std::vector<double>& values() const noexcept { return p_f_; }

    friend bool operator==(const FailureProfile&, const FailureProfile&) = default;

private:
    std::vector<double> p_f_;
};

/**
 * P_F per branch: an override passes through unchanged, otherwise the
 * branch's curve is evaluated at its PGA.
 */
inline FailureProfile failure_profile(const Network& net, const std::map<BranchIndex, FragilityCurve>& curves,
                                      std::span<const std::optional<double>> pga,
                                      const std::map<BranchIndex, double>& overrides = {}) {
    std::vector<double> p_f(net.branch_count());
    for (BranchIndex j = 0; j < net.branch_count(); ++j) {
        if (auto it = overrides.find(j); it != overrides.end()) {
            p_f[j] = it->second;
            continue;
        }
        auto curve = curves.find(j);
        if (curve == curves.end())
            throw Error(ErrorCode::schema, "branch " + std::to_string(j) + " has neither a fragility curve nor a P_F override",
                        "/curves/" + std::to_string(j));
        if (j >= pga.size() || !pga[j])
            throw Error(ErrorCode::schema, "branch " + std::to_string(j) + " has a curve but no PGA",
                        "/pga/direct/" + std::to_string(j));
        p_f[j] = evaluate_fragility(curve->second, *pga[j]);
    }
    for (const auto& [j, _] : overrides)
        if (j >= net.branch_count())
            throw Error(ErrorCode::schema, "override for unknown branch " + std::to_string(j), "/overrides/" + std::to_string(j));
    return FailureProfile(std::move(p_f));
}

inline FailureProfile failure_profile(const Network& net, const std::map<BranchIndex, FragilityCurve>& curves,
                                      std::span<const double> pga,
                                      const std::map<BranchIndex, double>& overrides = {}) {
    std::vector<std::optional<double>> opt(pga.begin(), pga.end());
    return failure_profile(net, curves, opt, overrides);
}

/// Parsed fragility document.
struct FragilityInput {
    std::map<BranchIndex, FragilityCurve> curves;
    std::map<BranchIndex, double> overrides;
    std::vector<PgaRecord> stations;
    PgaMapping mapping;
};

namespace detail {

inline BranchIndex parse_branch_key(const std::string& key, const std::string& path) {
    std::size_t used = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != key.size())
        throw Error(ErrorCode::schema, "branch key '" + key + "' is not an index", path);
    return static_cast<BranchIndex>(value);
}

inline double require_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw Error(ErrorCode::schema, "expected a number", path);
    return v.get<double>();
}

} // namespace detail

inline FragilityInput parse_fragility(const nlohmann::json& doc, const std::string& path = "") {
    FragilityInput in;
    if (!doc.is_object()) throw Error(ErrorCode::schema, "fragility input must be an object", path);
    if (auto it = doc.find("curves"); it != doc.end()) {
        if (!it->is_object()) throw Error(ErrorCode::schema, "'curves' must be an object", path + "/curves");
        for (const auto& [key, c] : it->items()) {
            const std::string p = path + "/curves/" + key;
            FragilityCurve curve;
            curve.median_pga = detail::require_number(detail::require(c, "median_pga", p), p + "/median_pga");
            curve.beta = detail::require_number(detail::require(c, "beta", p), p + "/beta");
            curve.validate(p);
            in.curves[detail::parse_branch_key(key, p)] = curve;
        }
    }
    if (auto it = doc.find("overrides"); it != doc.end()) {
        if (!it->is_object()) throw Error(ErrorCode::schema, "'overrides' must be an object", path + "/overrides");
        for (const auto& [key, v] : it->items()) {
            const std::string p = path + "/overrides/" + key;
            const double value = detail::require_number(v, p);
            if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::schema, "P_F override must lie in [0,1]", p);
            in.overrides[detail::parse_branch_key(key, p)] = value;
        }
    }
    if (auto it = doc.find("pga"); it != doc.end()) {
        const std::string pp = path + "/pga";
        if (!it->is_object()) throw Error(ErrorCode::schema, "'pga' must be an object", pp);
        if (auto d = it->find("direct"); d != it->end())
            for (const auto& [key, v] : d->items()) {
                const double pga = detail::require_number(v, pp + "/direct/" + key);
                if (!(pga >= 0.0)) throw Error(ErrorCode::schema, "pga must be nonnegative", pp + "/direct/" + key);
                in.mapping.direct[detail::parse_branch_key(key, pp + "/direct/" + key)] = pga;
            }
        if (auto s = it->find("stations"); s != it->end()) {
            if (!s->is_array()) throw Error(ErrorCode::schema, "'stations' must be an array", pp + "/stations");
            for (std::size_t i = 0; i < s->size(); ++i) {
                const std::string p = pp + "/stations/" + std::to_string(i);
                PgaRecord r;
                r.station_id = detail::require_string((*s)[i], "station_id", p);
                r.pga = detail::require_number(detail::require((*s)[i], "pga", p), p + "/pga");
                if (!(r.pga >= 0.0)) throw Error(ErrorCode::schema, "pga must be nonnegative", p + "/pga");
                if (auto loc = (*s)[i].find("location"); loc != (*s)[i].end()) {
                    if (!loc->is_array() || loc->size() != 2)
                        throw Error(ErrorCode::schema, "'location' must be [lat, lon]", p + "/location");
                    r.location = std::pair{detail::require_number((*loc)[0], p + "/location/0"),
                                           detail::require_number((*loc)[1], p + "/location/1")};
                }
                in.stations.push_back(std::move(r));
            }
        }
        if (auto b = it->find("branch_station"); b != it->end())
            for (const auto& [key, v] : b->items()) {
                if (!v.is_string()) throw Error(ErrorCode::schema, "station id must be a string", pp + "/branch_station/" + key);
                in.mapping.branch_station[detail::parse_branch_key(key, pp + "/branch_station/" + key)] = v.get<std::string>();
            }
        if (auto d = it->find("default"); d != it->end()) in.mapping.default_pga = detail::require_number(*d, pp + "/default");
    }
    return in;
}

/// Resolves a parsed fragility document against a network.
inline FailureProfile failure_profile(const Network& net, const FragilityInput& in) {
    std::vector<std::optional<double>> pga(net.branch_count());
    for (BranchIndex j = 0; j < net.branch_count(); ++j)
        if (!in.overrides.contains(j)) pga[j] = detail::resolve_branch_pga(in.stations, in.mapping, j);
    return failure_profile(net, in.curves, pga, in.overrides);
}

} // namespace resto

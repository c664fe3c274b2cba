#pragma once

#include "oracle.hpp"

#include "resto/resto.hpp"

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path data_dir() { return RESTO_DATA_DIR; }

inline std::filesystem::path data(const std::string& name) { return data_dir() / name; }

inline resto::Bus bus(std::string id, resto::BusKind kind = resto::BusKind::load) { return {std::move(id), kind}; }

inline resto::Branch branch(resto::BranchIndex i, std::string a, std::string b, bool open = false) {
    return {i, {std::move(a), std::move(b)}, open};
}

/// Fig. 2 reconstruction: feeder b1-b2, ring b2-b3-b5-b4 with the b4-b5 tie
/// normally open, DER at b6 behind b3.
inline resto::Network fig2() {
    using K = resto::BusKind;
    return resto::Network({bus("b1", K::transmission_source), bus("b2"), bus("b3"), bus("b4"), bus("b5"),
                           bus("b6", K::der_source)},
                          {branch(0, "b1", "b2"), branch(1, "b2", "b3"), branch(2, "b2", "b4"), branch(3, "b3", "b5"),
                           branch(4, "b4", "b5", true), branch(5, "b3", "b6")});
}

inline resto::ConstraintOptions fig2_options() {
    resto::ConstraintOptions c;
    c.forbid_source_island_merge = true;
    return c;
}

/// source - b0 - b1 through branches 0 and 1.
inline resto::Network series_feeder() {
    return resto::Network({bus("src", resto::BusKind::transmission_source), bus("b0"), bus("b1")},
                          {branch(0, "src", "b0"), branch(1, "b0", "b1")});
}

/// Fig. 3 reconstruction: b1 source, 1-2, 2-3, 2-4, 3-5, 4-6, 5-6.
inline resto::Network fig3() {
    return resto::Network({bus("b1", resto::BusKind::transmission_source), bus("b2"), bus("b3"), bus("b4"), bus("b5"),
                           bus("b6")},
                          {branch(0, "b1", "b2"), branch(1, "b2", "b3"), branch(2, "b2", "b4"), branch(3, "b3", "b5"),
                           branch(4, "b4", "b6"), branch(5, "b5", "b6")});
}

inline oracle::Grid to_grid(const resto::Network& net, bool forbid_merge = false) {
    oracle::Grid g;
    g.buses = static_cast<int>(net.bus_count());
    for (const auto& b : net.buses()) g.source.push_back(b.kind != resto::BusKind::load);
    for (const auto& br : net.branches())
        g.edges.emplace_back(static_cast<int>(*net.find_bus(br.endpoints[0])),
                             static_cast<int>(*net.find_bus(br.endpoints[1])));
    g.forbid_merge = forbid_merge;
    return g;
}

/**
 * Random connected network: a random spanning tree over `buses` buses plus
 * extra branches (parallel ones allowed) up to `branches`, one to two
 * source buses.
 */
inline resto::Network random_network(std::mt19937_64& rng, std::size_t buses, std::size_t branches) {
    using K = resto::BusKind;
    std::vector<resto::Bus> bs;
    for (std::size_t i = 0; i < buses; ++i) bs.push_back(bus("n" + std::to_string(i)));
    bs[std::uniform_int_distribution<std::size_t>(0, buses - 1)(rng)].kind = K::transmission_source;
    if (buses > 2 && std::bernoulli_distribution(0.4)(rng))
        bs[std::uniform_int_distribution<std::size_t>(0, buses - 1)(rng)].kind = K::der_source;
    std::vector<resto::Branch> br;
    for (std::size_t i = 1; i < buses; ++i) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        br.push_back(branch(br.size(), bs[parent].id, bs[i].id));
    }
    std::uniform_int_distribution<std::size_t> pick(0, buses - 1);
    while (br.size() < branches) {
        const std::size_t a = pick(rng), b = pick(rng);
        if (a == b) continue;
        br.push_back(branch(br.size(), bs[a].id, bs[b].id));
    }
    std::shuffle(br.begin(), br.end(), rng);
    for (std::size_t i = 0; i < br.size(); ++i) br[i].index = i;
    return resto::Network(std::move(bs), std::move(br));
}

/// Random network with m branches over 2..m+1 buses.
inline resto::Network random_network(std::mt19937_64& rng, std::size_t m) {
    const std::size_t buses = std::uniform_int_distribution<std::size_t>(2, m + 1)(rng);
    return random_network(rng, buses, m);
}

inline resto::FailureProfile random_profile(std::mt19937_64& rng, std::size_t m, double lo = 0.05, double hi = 0.95) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> p(m);
    for (auto& x : p) x = u(rng);
    return resto::FailureProfile(std::move(p));
}

} // namespace fixtures

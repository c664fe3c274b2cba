#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace resto;
using fixtures::branch;
using fixtures::bus;

namespace {

SystemState state(const char* s) { return SystemState::from_string(s); }

ErrorCode load_error(const std::string& doc) {
    try {
        parse_network(doc);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for " << doc;
    return ErrorCode::malformed;
}

std::string load_field(const std::string& doc) {
    try {
        parse_network(doc);
    } catch (const Error& e) {
        return e.field();
    }
    return "<none>";
}

} // namespace

TEST(SystemStateTest, RoundTripsThroughStringAndCode) {
    const auto s = state("UEDUED");
    EXPECT_EQ(s.to_string(), "UEDUED");
    EXPECT_EQ(SystemState::from_code(s.code(), s.size()), s);
    EXPECT_THROW(SystemState::from_code(0x3, 6), Error);
    EXPECT_THROW(SystemState::from_code(1ull << 12, 6), Error);
    EXPECT_EQ(s.count(Status::U), 2u);
    EXPECT_EQ(s.count(Status::E), 2u);
    EXPECT_EQ(s.count(Status::D), 2u);
    EXPECT_EQ(SystemState(4).code(), 0u);
}

TEST(SystemStateTest, RejectsBadInput) {
    EXPECT_THROW(SystemState::from_string("UXE"), Error);
    EXPECT_THROW(SystemState(33), Error);
}

TEST(LoadNetworkTest, ParsesSixBusDocument) {
    const auto net = parse_network(read_text_file(fixtures::data("fig2_network.json")));
    EXPECT_EQ(net.branch_count(), 6u);
    EXPECT_EQ(net.bus_count(), 6u);
    EXPECT_TRUE(net.buses()[0].is_source());
    EXPECT_EQ(net.buses()[5].kind, BusKind::der_source);
    EXPECT_TRUE(net.branches()[4].normally_open);
    EXPECT_TRUE(net.connected());
    EXPECT_TRUE(net.warnings().empty());
}

TEST(LoadNetworkTest, MinimalNetwork) {
    const auto net = parse_network(
        R"({"buses":[{"id":"s","kind":"transmission_source"},{"id":"a","kind":"load"}],
            "branches":[{"index":0,"endpoints":["s","a"]}]})");
    EXPECT_EQ(net.branch_count(), 1u);
    EXPECT_FALSE(net.branches()[0].normally_open);
}

TEST(LoadNetworkTest, AcceptsBranchesInAnyOrder) {
    const auto net = parse_network(
        R"({"buses":[{"id":"s","kind":"transmission_source"},{"id":"a","kind":"load"},{"id":"b","kind":"load"}],
            "branches":[{"index":1,"endpoints":["a","b"]},{"index":0,"endpoints":["s","a"]}]})");
    EXPECT_EQ(net.branches()[0].endpoints[0], "s");
    EXPECT_EQ(net.branches()[1].endpoints[1], "b");
}

TEST(LoadNetworkTest, DanglingEndpoint) {
    const std::string doc =
        R"({"buses":[{"id":"b1","kind":"transmission_source"},{"id":"b2","kind":"load"}],
            "branches":[{"index":0,"endpoints":["b1","b9"]}]})";
    EXPECT_EQ(load_error(doc), ErrorCode::schema);
    EXPECT_EQ(load_field(doc), "/branches/0/endpoints/1");
}

TEST(LoadNetworkTest, ValidationErrors) {
    // duplicate bus id
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"transmission_source"},{"id":"a","kind":"load"}],
                             "branches":[{"index":0,"endpoints":["a","a"]}]})"),
              "/buses/1/id");
    // no source
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"load"},{"id":"b","kind":"load"}],
                             "branches":[{"index":0,"endpoints":["a","b"]}]})"),
              "/buses");
    // non-contiguous indices
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"der_source"},{"id":"b","kind":"load"}],
                             "branches":[{"index":1,"endpoints":["a","b"]}]})"),
              "/branches/0/index");
    // duplicate branch index
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"der_source"},{"id":"b","kind":"load"}],
                             "branches":[{"index":0,"endpoints":["a","b"]},{"index":0,"endpoints":["b","a"]}]})"),
              "/branches/1/index");
    // self loop
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"der_source"},{"id":"b","kind":"load"}],
                             "branches":[{"index":0,"endpoints":["a","a"]}]})"),
              "/branches/0/endpoints");
    // no branches
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"der_source"}],"branches":[]})"), "/branches");
    // unknown kind
    EXPECT_EQ(load_field(R"({"buses":[{"id":"a","kind":"wind"}],"branches":[]})"), "/buses/0/kind");
    // missing field
    EXPECT_EQ(load_field(R"({"buses":[]})"), "/branches");
    EXPECT_EQ(load_error("{not json"), ErrorCode::malformed);
}

TEST(LoadNetworkTest, DisconnectedGraphWarnsOnly) {
    const auto net = parse_network(
        R"({"buses":[{"id":"s","kind":"transmission_source"},{"id":"a","kind":"load"},
                     {"id":"x","kind":"load"},{"id":"y","kind":"load"}],
            "branches":[{"index":0,"endpoints":["s","a"]},{"index":1,"endpoints":["x","y"]}]})");
    EXPECT_FALSE(net.connected());
    ASSERT_EQ(net.warnings().size(), 1u);
}

TEST(LoadNetworkTest, JsonRoundTrip) {
    const auto net = fixtures::fig2();
    const auto again = load_network(to_json(net));
    EXPECT_EQ(to_json(again), to_json(net));
}

TEST(ConnectedBranchesTest, RadialChain) {
    const Network net({bus("b0", BusKind::transmission_source), bus("b1"), bus("b2"), bus("b3")},
                      {branch(0, "b0", "b1"), branch(1, "b1", "b2"), branch(2, "b2", "b3")});
    EXPECT_EQ(connected_branches(net, 1), (std::vector<BranchIndex>{0, 2}));
    EXPECT_EQ(connected_branches(net, 0), (std::vector<BranchIndex>{1}));
    EXPECT_THROW(connected_branches(net, 3), Error);
}

TEST(ConnectedBranchesTest, IsolatedAndStar) {
    const Network iso({bus("s", BusKind::transmission_source), bus("a"), bus("x"), bus("y")},
                      {branch(0, "s", "a"), branch(1, "x", "y")});
    EXPECT_TRUE(connected_branches(iso, 1).empty());
    const Network star({bus("c", BusKind::transmission_source), bus("a"), bus("b"), bus("d")},
                       {branch(0, "c", "a"), branch(1, "c", "b"), branch(2, "c", "d")});
    EXPECT_EQ(connected_branches(star, 0), (std::vector<BranchIndex>{1, 2}));
}

TEST(ConnectedBranchesTest, SymmetricOnRandomNetworks) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto net = fixtures::random_network(rng, 1 + trial % 9);
        for (BranchIndex j = 0; j < net.branch_count(); ++j)
            for (BranchIndex k : connected_branches(net, j)) {
                const auto back = connected_branches(net, k);
                EXPECT_NE(std::find(back.begin(), back.end(), j), back.end());
                EXPECT_NE(j, k);
            }
    }
}

TEST(SourceAdjacentTest, Fig2OnlyFeeders) {
    const auto net = fixtures::fig2();
    for (BranchIndex j = 0; j < 6; ++j) EXPECT_EQ(source_adjacent(net, j), j == 0 || j == 5) << j;
    EXPECT_THROW(source_adjacent(net, 6), Error);
}

TEST(SourceAdjacentTest, AllSourcesAndLoadOnly) {
    const Network all({bus("a", BusKind::transmission_source), bus("b", BusKind::der_source),
                       bus("c", BusKind::der_source)},
                      {branch(0, "a", "b"), branch(1, "b", "c")});
    EXPECT_TRUE(source_adjacent(all, 0));
    EXPECT_TRUE(source_adjacent(all, 1));
    const Network chain({bus("s", BusKind::transmission_source), bus("a"), bus("b")},
                        {branch(0, "s", "a"), branch(1, "a", "b")});
    EXPECT_FALSE(source_adjacent(chain, 1));
}

TEST(FeasibleBranchActionsTest, Fig2) {
    const auto net = fixtures::fig2();
    EXPECT_EQ(feasible_branch_actions(net, SystemState(6)), (std::vector<BranchIndex>{0, 5}));
    EXPECT_TRUE(feasible_branch_actions(net, state("DUUUUD")).empty());
    EXPECT_TRUE(feasible_branch_actions(net, state("EEEEEE")).empty());
    EXPECT_EQ(feasible_branch_actions(net, state("EUUUUE")), (std::vector<BranchIndex>{1, 2, 3}));
    EXPECT_THROW(feasible_branch_actions(net, SystemState(5)), Error);
}

TEST(FeasibleBranchActionsTest, OnlyUnknownBranchesOnRandomStates) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto net = fixtures::random_network(rng, 1 + trial % 8);
        SystemState s(net.branch_count());
        for (BranchIndex j = 0; j < s.size(); ++j) s.set(j, static_cast<Status>(rng() % 3));
        for (BranchIndex j : feasible_branch_actions(net, s)) EXPECT_EQ(s[j], Status::U);
    }
}

TEST(ActionValidTest, Fig2InitialPair) {
    const auto net = fixtures::fig2();
    EXPECT_TRUE(action_valid(net, SystemState(6), Action{0, 5}));
    EXPECT_TRUE(action_valid(net, SystemState(6), Action{0}));
}

TEST(ActionValidTest, SharedBusViolatesDistance) {
    const auto net = fixtures::fig2();
    // 1 and 2 share b2.
    EXPECT_FALSE(action_valid(net, state("EUUUUU"), Action{1, 2}));
    EXPECT_TRUE(action_valid(net, state("EUUUUU"), Action{1}));
}

TEST(ActionValidTest, JointLoopBetweenTwoTrees) {
    // Trees s-a-a2 and t-b-b2. Branches 3 (a-b) and 4 (a2-b2) share no bus
    // and each bridges the trees without a loop; together they close one.
    const Network net({bus("s", BusKind::transmission_source), bus("a"), bus("a2"), bus("t", BusKind::der_source),
                       bus("b"), bus("b2")},
                      {branch(0, "s", "a"), branch(1, "a", "a2"), branch(2, "t", "b"), branch(3, "a", "b"),
                       branch(4, "a2", "b2"), branch(5, "b", "b2")});
    const auto s = state("EEEUUE");
    ASSERT_TRUE(energized_forest_ok(net, s));
    EXPECT_TRUE(action_valid(net, s, Action{3}));
    EXPECT_TRUE(action_valid(net, s, Action{4}));
    EXPECT_FALSE(action_valid(net, s, Action{3, 4}));
}

TEST(ActionValidTest, SingleBranchClosingLoop) {
    const Network ring({bus("s", BusKind::transmission_source), bus("a"), bus("b")},
                       {branch(0, "s", "a"), branch(1, "a", "b"), branch(2, "b", "s")});
    EXPECT_FALSE(action_valid(ring, state("EEU"), Action{2}));
}

TEST(ActionValidTest, Errors) {
    const auto net = fixtures::fig2();
    EXPECT_THROW(action_valid(net, SystemState(6), Action{1}), Error); // not in A^b
    try {
        action_valid(net, SystemState(6), Action{3});
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::infeasible);
    }
    const std::vector<BranchIndex> empty;
    EXPECT_THROW(action_valid(net, SystemState(6), empty), Error);
    const std::vector<BranchIndex> dup{0, 0};
    EXPECT_THROW(action_valid(net, SystemState(6), dup), Error);
}

TEST(ActionValidTest, SourceIslandMerge) {
    // Two sources at the ends of a chain; the middle branch would join the
    // two energized trees without a loop.
    const Network net({bus("s", BusKind::transmission_source), bus("a"), bus("b"), bus("t", BusKind::der_source)},
                      {branch(0, "s", "a"), branch(1, "a", "b"), branch(2, "b", "t")});
    const auto s = state("EUE");
    EXPECT_TRUE(action_valid(net, s, Action{1}));
    ConstraintOptions forbid;
    forbid.forbid_source_island_merge = true;
    EXPECT_FALSE(action_valid(net, s, Action{1}, forbid));
    // Extending one tree toward an unenergized source bus is not a merge.
    EXPECT_TRUE(action_valid(net, state("EUU"), Action{1}, forbid));
}

TEST(ActionValidTest, ValidityHookIsAnExtraConjunct) {
    const auto net = fixtures::fig2();
    ConstraintOptions opts;
    opts.state_valid = [](const Network&, const SystemState& s) { return s[5] != Status::E; };
    EXPECT_TRUE(action_valid(net, SystemState(6), Action{0}, opts));
    EXPECT_FALSE(action_valid(net, SystemState(6), Action{5}, opts));
    EXPECT_FALSE(action_valid(net, SystemState(6), Action{0, 5}, opts));
}

TEST(ActionValidTest, DistanceViolationIsInheritedBySupersets) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto net = fixtures::random_network(rng, 2 + trial % 7);
        const SystemState s(net.branch_count());
        const auto cand = feasible_branch_actions(net, s);
        for (BranchIndex x : cand)
            for (BranchIndex y : cand) {
                if (x >= y || (net.neighbor_mask(x) >> y & 1u) == 0) continue;
                for (BranchIndex z : cand) {
                    if (z == x || z == y) continue;
                    EXPECT_FALSE(action_valid(net, s, Action{x, y, z}));
                }
                EXPECT_FALSE(action_valid(net, s, Action{x, y}));
            }
    }
}

TEST(EnergizedForestTest, DetectsCycleAndSourcelessTree) {
    const auto net = fixtures::fig2();
    EXPECT_TRUE(energized_forest_ok(net, state("EEEUUE")));
    EXPECT_FALSE(energized_forest_ok(net, state("EEEEEU"))); // ring closed
    EXPECT_FALSE(energized_forest_ok(net, state("UUUEUU"))); // no source
}

TEST(ActionTest, CanonicalForm) {
    const Action a{4, 1};
    EXPECT_EQ(a.to_string(), "{1,4}");
    EXPECT_EQ(a, (Action{1, 4}));
    EXPECT_LT((Action{1, 4}), (Action{2}));
    EXPECT_LT((Action{1}), (Action{1, 4}));
    EXPECT_THROW((Action{1, 1}), Error);
    EXPECT_THROW(Action(std::vector<BranchIndex>{}), Error);
    EXPECT_EQ(Action::from_mask(0b10010), a);
    const std::vector<Action> seq{Action{2}, Action{1, 4}, Action{3}};
    EXPECT_EQ(to_string(seq), "{2} {1,4} {3}");
}

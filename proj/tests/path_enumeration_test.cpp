// Copyright 2026 The coplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "coplan/andor_graph.hpp"
#include "coplan/error.hpp"
#include "support/oracles.hpp"

namespace coplan {
namespace {

std::set<std::string> name_set(const AndOrGraph& g, const CooperationPath& p) {
  auto v = arc_names(g, p.arcs);
  return {v.begin(), v.end()};
}

TEST(EnumeratePaths, Fig4HasTwoPaths) {
  auto g = AndOrGraph::build(testing::fig4_spec());
  auto paths = enumerate_paths(g);
  ASSERT_EQ(paths.size(), 2u);
  // Equal cost, so the sorted arc-name lists decide: {h_1,h_2} < {h_1,h_3}.
  EXPECT_EQ(name_set(g, paths[0]), (std::set<std::string>{"h_1", "h_2"}));
  EXPECT_EQ(name_set(g, paths[1]), (std::set<std::string>{"h_1", "h_3"}));
  // Execution order puts the producer of n_1 before h_1; nodes end at the root.
  EXPECT_EQ(g.arc(paths[0].arcs.back()).name, "h_1");
  EXPECT_EQ(paths[0].nodes.back(), g.root());
}

TEST(EnumeratePaths, PalletizationCountsFollowPowersOfTwo) {
  for (int k = 1; k <= 12; ++k) {
    auto g = AndOrGraph::build(generate_palletization(k));
    EXPECT_EQ(enumerate_paths(g).size(), std::size_t{1} << k) << "K=" << k;
  }
}

TEST(EnumeratePaths, PalletizationFifteenParts) {
  auto g = AndOrGraph::build(generate_palletization(15));
  const auto t0 = std::chrono::steady_clock::now();
  auto paths = enumerate_paths(g);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(paths.size(), 32768u);
  EXPECT_LT(secs, 5.0);
  EXPECT_EQ(paths.front().cost, 15.0);
  EXPECT_EQ(paths.back().cost, 60.0);
  for (std::size_t i = 1; i < paths.size(); ++i) ASSERT_LE(paths[i - 1].cost, paths[i].cost);
}

TEST(EnumeratePaths, EqualWeightsMakeEveryPathEquivalent) {
  auto g = AndOrGraph::build(generate_palletization(3, 2.0, 2.0));
  auto paths = enumerate_paths(g);
  ASSERT_EQ(paths.size(), 8u);
  for (const auto& p : paths) {
    EXPECT_EQ(p.cost, 6.0);
    EXPECT_TRUE(path_equivalent(p, paths[0]));
  }
}

TEST(EnumeratePaths, CapIsEnforced) {
  auto g = AndOrGraph::build(generate_palletization(5));
  EXPECT_NO_THROW(enumerate_paths(g, 32));
  try {
    enumerate_paths(g, 31);
    FAIL() << "expected PathExplosion";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathExplosion);
  }
}

TEST(EnumeratePaths, SharedSubgoalCountedOnce) {
  // Both children of the root need "base"; a solution builds it once.
  GraphSpec s{"diamond",
              {{"top", 0, true, false}, {"l", 0, false, false}, {"r", 0, false, false},
               {"base", 1.5, false, false}, {"raw", 0, false, true}},
              {{"join", "top", {"l", "r"}, 1, {{"j", AgentKind::Robot}}},
               {"mk_l", "l", {"base"}, 1, {{"x", AgentKind::Robot}}},
               {"mk_r", "r", {"base"}, 1, {{"x", AgentKind::Robot}}},
               {"b1", "base", {"raw"}, 1, {{"x", AgentKind::Robot}}},
               {"b2", "base", {"raw"}, 3, {{"x", AgentKind::Robot}}}}};
  auto g = AndOrGraph::build(s);
  auto paths = enumerate_paths(g);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_DOUBLE_EQ(paths[0].cost, 1 + 1 + 1 + 1 + 1.5);
  EXPECT_DOUBLE_EQ(paths[1].cost, 1 + 1 + 1 + 3 + 1.5);
}

TEST(EnumeratePaths, MatchesSubsetOracleOnRandomDags) {
  std::mt19937_64 rng(3);
  for (int model = 0; model < 300; ++model) {
    auto g = AndOrGraph::build(testing::random_model(rng));
    auto paths = enumerate_paths(g);
    auto oracle = testing::brute_force_paths(g);
    ASSERT_EQ(paths.size(), oracle.size()) << g.dump();
    std::multiset<std::vector<std::uint32_t>> got, want;
    for (const auto& p : paths) {
      std::vector<std::uint32_t> v;
      for (ArcId a : p.arcs) v.push_back(a.value);
      std::sort(v.begin(), v.end());
      got.insert(v);
      EXPECT_NEAR(p.cost, path_cost(g, p), 0.0);
    }
    for (const auto& p : oracle) want.insert(p.arcs);
    ASSERT_EQ(got, want);
    for (std::size_t i = 1; i < paths.size(); ++i) {
      ASSERT_LE(paths[i - 1].cost, paths[i].cost + kCostTolerance);
    }
  }
}

TEST(PathCost, SumsNodeAndArcWeights) {
  auto g = load_graph(generate_palletization(15));
  EXPECT_EQ(path_cost(g, g.paths()[0]), 15.0);
  for (const auto& p : g.paths()) {
    const auto hw = std::count_if(p.arcs.begin(), p.arcs.end(),
                                  [&](ArcId a) { return g.arc(a).name.starts_with("hw_"); });
    if (hw == 1) EXPECT_EQ(path_cost(g, p), 18.0);
  }
  GraphSpec solo{"solo", {{"only", 0, true, true}}, {}};
  auto s = load_graph(solo);
  EXPECT_EQ(path_cost(s, s.paths()[0]), 0.0);
}

TEST(PathCost, UnknownMemberThrows) {
  auto g = AndOrGraph::build(generate_palletization(1));
  CooperationPath bogus;
  bogus.arcs.push_back(ArcId{99});
  try {
    path_cost(g, bogus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMember);
  }
}

TEST(PathEquality, EqualAndEquivalent) {
  auto g = load_graph(generate_palletization(15));
  auto find = [&](std::set<std::string> hw) -> const CooperationPath& {
    for (const auto& p : g.paths()) {
      std::set<std::string> got;
      for (const auto& n : arc_names(g, p.arcs)) {
        if (n.starts_with("hw_")) got.insert(n);
      }
      if (got == hw) return p;
    }
    throw std::logic_error("not found");
  };
  const auto& all_h = find({});
  const auto& hw3 = find({"hw_3"});
  const auto& hw7 = find({"hw_7"});
  EXPECT_TRUE(path_equal(all_h, all_h));
  EXPECT_TRUE(path_equivalent(all_h, all_h));
  EXPECT_FALSE(path_equal(hw3, hw7));
  EXPECT_TRUE(path_equivalent(hw3, hw7));
  EXPECT_FALSE(path_equal(all_h, hw3));
  EXPECT_FALSE(path_equivalent(all_h, hw3));
}

}  // namespace
}  // namespace coplan

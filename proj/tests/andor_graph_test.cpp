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

#include <random>

#include "coplan/andor_graph.hpp"
#include "coplan/error.hpp"
#include "support/oracles.hpp"

namespace coplan {
namespace {

using testing::engine_feasible;
using testing::fig4_spec;
using testing::ScratchSets;
using testing::scratch_feasible;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::ConfigError;
}

void finish_arc(AndOrGraph& g, std::string_view name) {
  const ArcId id = g.arc_id(name);
  for (const auto& a : g.arc(id).actions) g.record_action_finished(id, a.name);
  const ArcId done[] = {id};
  g.update_status(done);
}

TEST(AndOrGraphBuild, Fig4Structure) {
  auto g = AndOrGraph::build(fig4_spec());
  EXPECT_EQ(g.node(g.root()).name, "n_r");
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.arc_count(), 3u);
  std::set<std::string> leaves;
  for (const auto& n : g.nodes()) {
    if (n.is_leaf) leaves.insert(n.name);
  }
  EXPECT_EQ(leaves, (std::set<std::string>{"n_2", "n_3", "n_4", "n_5"}));
  EXPECT_FALSE(g.node(g.node_id("n_1")).solved);
  for (const auto& h : g.arcs()) {
    for (const auto& a : h.actions) EXPECT_FALSE(a.finished);
  }
}

TEST(AndOrGraphBuild, SingleSolvedRootIsAlreadySolved) {
  GraphSpec s{"solo", {{"only", 0, true, true}}, {}};
  auto g = load_graph(s);
  EXPECT_EQ(g.status().kind, StatusKind::Solved);
  ASSERT_EQ(g.paths().size(), 1u);
  EXPECT_EQ(g.paths()[0].cost, 0.0);
  EXPECT_TRUE(g.paths()[0].arcs.empty());
}

TEST(AndOrGraphBuild, ParentAmongChildrenIsCyclic) {
  auto s = fig4_spec();
  s.arcs[1].children.push_back("n_1");
  EXPECT_EQ(code_of([&] { AndOrGraph::build(s); }), ErrorCode::CyclicGraph);
}

TEST(AndOrGraphBuild, LongerCycleIsDetected) {
  GraphSpec s{"cyc",
              {{"r", 0, true, false}, {"a", 0, false, false}, {"b", 0, false, false}},
              {{"x", "r", {"a"}, 1, {{"go", AgentKind::Human}}},
               {"y", "a", {"b"}, 1, {{"go", AgentKind::Human}}},
               {"z", "b", {"a"}, 1, {{"go", AgentKind::Human}}}}};
  EXPECT_EQ(code_of([&] { AndOrGraph::build(s); }), ErrorCode::CyclicGraph);
}

TEST(AndOrGraphBuild, StructuralErrors) {
  auto dangling = fig4_spec();
  dangling.arcs[0].children.push_back("ghost");
  EXPECT_EQ(code_of([&] { AndOrGraph::build(dangling); }), ErrorCode::DanglingReference);

  auto bad_parent = fig4_spec();
  bad_parent.arcs[0].parent = "ghost";
  EXPECT_EQ(code_of([&] { AndOrGraph::build(bad_parent); }), ErrorCode::DanglingReference);

  auto two_roots = fig4_spec();
  two_roots.nodes[1].root = true;
  EXPECT_EQ(code_of([&] { AndOrGraph::build(two_roots); }), ErrorCode::MultipleRoots);

  auto no_root = fig4_spec();
  no_root.nodes[0].root = false;
  EXPECT_EQ(code_of([&] { AndOrGraph::build(no_root); }), ErrorCode::NoRoot);

  auto empty = fig4_spec();
  empty.arcs[2].children.clear();
  EXPECT_EQ(code_of([&] { AndOrGraph::build(empty); }), ErrorCode::EmptyChildren);

  auto dup = fig4_spec();
  dup.arcs[2].name = "h_1";
  EXPECT_EQ(code_of([&] { AndOrGraph::build(dup); }), ErrorCode::DuplicateName);

  auto solved_inner = fig4_spec();
  solved_inner.nodes[1].solved = true;
  EXPECT_EQ(code_of([&] { AndOrGraph::build(solved_inner); }), ErrorCode::InvalidInitialState);

  auto no_actions = fig4_spec();
  no_actions.arcs[0].actions.clear();
  EXPECT_EQ(code_of([&] { AndOrGraph::build(no_actions); }), ErrorCode::SchemaError);

  auto negative = fig4_spec();
  negative.arcs[0].weight = -1;
  EXPECT_EQ(code_of([&] { AndOrGraph::build(negative); }), ErrorCode::SchemaError);
}

TEST(AndOrGraphFeasible, FreshFig4) {
  auto g = AndOrGraph::build(fig4_spec());
  EXPECT_EQ(engine_feasible(g), (ScratchSets{{"n_1"}, {"h_2", "h_3"}}));
}

TEST(AndOrGraphFeasible, FreshPalletization) {
  auto g = AndOrGraph::build(generate_palletization(15));
  EXPECT_EQ(engine_feasible(g), (ScratchSets{{"pallet_1"}, {"h_1", "hw_1"}}));
}

TEST(AndOrGraphFeasible, SolvedGraphHasEmptySets) {
  auto g = AndOrGraph::build(generate_palletization(1));
  finish_arc(g, "h_1");
  EXPECT_EQ(g.status().kind, StatusKind::Solved);
  EXPECT_TRUE(g.feasible_sets().arcs.empty());
  EXPECT_TRUE(g.feasible_sets().nodes.empty());
}

TEST(AndOrGraphUpdate, Fig4SolvedParentExcludesSibling) {
  auto g = AndOrGraph::build(fig4_spec());
  finish_arc(g, "h_3");
  EXPECT_TRUE(g.node(g.node_id("n_1")).solved);
  const auto& h2 = g.arc(g.arc_id("h_2"));
  EXPECT_FALSE(h2.suppressed);
  EXPECT_FALSE(h2.feasible);
  EXPECT_EQ(engine_feasible(g), (ScratchSets{{"n_r"}, {"h_1"}}));
}

TEST(AndOrGraphUpdate, PalletizationSuppressesSibling) {
  auto g = AndOrGraph::build(generate_palletization(15));
  finish_arc(g, "h_1");
  finish_arc(g, "h_2");
  finish_arc(g, "hw_3");
  EXPECT_TRUE(g.node(g.node_id("pallet_3")).solved);
  EXPECT_TRUE(g.arc(g.arc_id("h_3")).suppressed);
  EXPECT_EQ(engine_feasible(g), (ScratchSets{{"pallet_4"}, {"h_4", "hw_4"}}));
}

TEST(AndOrGraphUpdate, FinalArcSolves) {
  auto g = AndOrGraph::build(generate_palletization(15));
  for (int i = 1; i <= 15; ++i) finish_arc(g, "h_" + std::to_string(i));
  EXPECT_EQ(g.status().kind, StatusKind::Solved);
}

TEST(AndOrGraphUpdate, ArcNotDoneIsRejected) {
  auto g = AndOrGraph::build(generate_palletization(2));
  const ArcId h1[] = {g.arc_id("h_1")};
  EXPECT_EQ(code_of([&] { g.update_status(h1); }), ErrorCode::ArcNotDone);
}

TEST(AndOrGraphActions, RemainingCountsAndOrder) {
  auto g = AndOrGraph::build(generate_palletization(15));
  const ArcId h1 = g.arc_id("h_1");
  auto p = g.record_action_finished(h1, "inspect");
  EXPECT_EQ(p.remaining, 6u);
  EXPECT_FALSE(p.done);
  EXPECT_EQ(code_of([&] { g.record_action_finished(h1, "grasp"); }), ErrorCode::OutOfOrder);
  EXPECT_EQ(code_of([&] { g.record_action_finished(h1, "inspect"); }), ErrorCode::OutOfOrder);
  EXPECT_EQ(code_of([&] { g.record_action_finished(h1, "dance"); }), ErrorCode::UnknownAction);
  for (const char* a : {"deliver-part", "approach-part", "grasp", "approach-goal", "ungrasp"}) {
    g.record_action_finished(h1, a);
  }
  p = g.record_action_finished(h1, "start-pose");
  EXPECT_EQ(p.remaining, 0u);
  EXPECT_TRUE(p.done);
  EXPECT_TRUE(g.arc(h1).done);
}

TEST(AndOrGraphActions, InfeasibleArcIsRejected) {
  auto g = AndOrGraph::build(generate_palletization(3));
  EXPECT_EQ(code_of([&] { g.record_action_finished(g.arc_id("h_2"), "inspect"); }),
            ErrorCode::ArcNotFeasible);
}

TEST(AndOrGraphOptimal, FreshPalletization) {
  auto g = load_graph(generate_palletization(15));
  const auto p = g.optimal_path();
  EXPECT_DOUBLE_EQ(p.cost, 15.0);
  for (const auto& name : arc_names(g, p.arcs)) EXPECT_EQ(name.substr(0, 2), "h_");
  EXPECT_EQ(p.action_sequence.size(), 105u);
}

TEST(AndOrGraphOptimal, AfterHwDone) {
  auto g = load_graph(generate_palletization(15));
  finish_arc(g, "h_1");
  finish_arc(g, "hw_2");
  const auto p = g.optimal_path();
  EXPECT_EQ(p.cost, 18.0);
  const auto names = arc_names(g, p.arcs);
  EXPECT_NE(std::find(names.begin(), names.end(), "hw_2"), names.end());
  EXPECT_EQ(std::count_if(names.begin(), names.end(), [](const std::string& n) { return n.starts_with("hw_"); }),
            1);
  // Finished actions are not pending any more.
  EXPECT_EQ(p.action_sequence.size(), 13u * 7u);
}

TEST(AndOrGraphOptimal, EverythingSuppressedHasNoViablePath) {
  auto g = load_graph(generate_palletization(2));
  g.suppress_arc(g.arc_id("h_1"));
  g.suppress_arc(g.arc_id("hw_1"));
  EXPECT_EQ(g.status().kind, StatusKind::Failed);
  EXPECT_EQ(code_of([&] { (void)g.optimal_path(); }), ErrorCode::NoViablePath);
}

TEST(AndOrGraphOptimal, ThroughArc) {
  auto g = load_graph(generate_palletization(4));
  auto p = g.optimal_path_through(g.arc_id("hw_3"));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->cost, 7.0);
  g.suppress_arc(g.arc_id("hw_1"));
  EXPECT_FALSE(g.optimal_path_through(g.arc_id("hw_1")));
}

TEST(AndOrGraphOptimal, PathsNotLoaded) {
  auto g = AndOrGraph::build(fig4_spec());
  EXPECT_EQ(code_of([&] { (void)g.optimal_path(); }), ErrorCode::PathsNotLoaded);
}

TEST(AndOrGraphStatus, AllRootArcsSuppressedFails) {
  // Two ways into the root, both consuming the same intermediate part.
  GraphSpec s{"fork",
              {{"goal", 0, true, false}, {"mid", 0, false, false}, {"raw", 0, false, true},
               {"spare", 0, false, true}},
              {{"make", "mid", {"raw"}, 1, {{"cut", AgentKind::Robot}}},
               {"alt", "mid", {"raw", "spare"}, 1, {{"weld", AgentKind::Robot}}},
               {"finish_a", "goal", {"mid", "spare"}, 1, {{"bolt", AgentKind::Human}}},
               {"finish_b", "goal", {"mid"}, 2, {{"glue", AgentKind::Human}}}}};
  auto g = load_graph(s);
  finish_arc(g, "make");
  EXPECT_EQ(g.status().kind, StatusKind::InProgress);
  g.suppress_arc(g.arc_id("finish_a"));
  EXPECT_EQ(g.status().kind, StatusKind::InProgress);
  const auto st = g.suppress_arc(g.arc_id("finish_b"));
  EXPECT_EQ(st.kind, StatusKind::Failed);
  EXPECT_TRUE(st.feasible_arcs.empty());
  EXPECT_TRUE(st.feasible_nodes.empty());
}

TEST(AndOrGraphDump, DeterministicAndSorted) {
  auto a = AndOrGraph::build(fig4_spec());
  auto spec = fig4_spec();
  std::reverse(spec.nodes.begin(), spec.nodes.end());
  std::reverse(spec.arcs.begin(), spec.arcs.end());
  auto b = AndOrGraph::build(spec);
  EXPECT_EQ(a.dump(), b.dump());
  const std::string expected =
      "graph fig4\n"
      "node n_1 weight=0 leaf=0 root=0 solved=0 feasible=1\n"
      "node n_2 weight=0 leaf=1 root=0 solved=1 feasible=0\n"
      "node n_3 weight=0 leaf=1 root=0 solved=1 feasible=0\n"
      "node n_4 weight=0 leaf=1 root=0 solved=1 feasible=0\n"
      "node n_5 weight=0 leaf=1 root=0 solved=1 feasible=0\n"
      "node n_r weight=0 leaf=0 root=1 solved=0 feasible=0\n"
      "arc h_1 parent=n_r children=n_1,n_2 weight=1 done=0 feasible=0 suppressed=0 actions=join:robot:0\n"
      "arc h_2 parent=n_1 children=n_3,n_4 weight=1 done=0 feasible=1 suppressed=0 actions=assemble:human:0\n"
      "arc h_3 parent=n_1 children=n_5 weight=1 done=0 feasible=1 suppressed=0 actions=fetch:robot:0\n"
      "status in_progress\n";
  EXPECT_EQ(a.dump(), expected);
}

TEST(AndOrGraphCopy, CopiesAreIndependent) {
  auto g = load_graph(generate_palletization(3));
  auto copy = g;
  finish_arc(copy, "h_1");
  EXPECT_FALSE(g.arc(g.arc_id("h_1")).done);
  EXPECT_TRUE(copy.arc(copy.arc_id("h_1")).done);
  EXPECT_EQ(g.paths().data(), copy.paths().data());
}

// Random legal runs: after every mutation the incremental state must agree
// with the definitions applied from scratch, and never move backwards.
TEST(AndOrGraphProperty, IncrementalMatchesScratchOnRandomDags) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int model = 0; model < 400; ++model) {
    auto spec = testing::random_model(rng);
    auto g = load_graph(spec);
    std::size_t solved_before = 0, done_before = 0;
    std::set<std::string> suppressed_seen;
    for (int step = 0; step < 60; ++step) {
      ASSERT_EQ(engine_feasible(g), scratch_feasible(g)) << g.dump();
      const auto oracle = testing::brute_min_cost(g);
      if (g.status().kind == StatusKind::InProgress || oracle) {
        if (oracle) {
          ASSERT_NEAR(g.optimal_path().cost, *oracle, kCostTolerance) << g.dump();
        } else {
          ASSERT_EQ(code_of([&] { (void)g.optimal_path(); }), ErrorCode::NoViablePath);
        }
      }
      std::size_t solved = 0, done = 0;
      for (const auto& n : g.nodes()) solved += n.solved;
      for (const auto& h : g.arcs()) {
        done += h.done;
        if (h.suppressed) suppressed_seen.insert(h.name);
        if (suppressed_seen.count(h.name)) ASSERT_FALSE(h.feasible);
      }
      ASSERT_GE(solved, solved_before);
      ASSERT_GE(done, done_before);
      solved_before = solved;
      done_before = done;
      ++checked;

      auto arcs = g.feasible_sets().arcs;
      if (arcs.empty()) break;
      const ArcId pick = arcs[std::uniform_int_distribution<std::size_t>(0, arcs.size() - 1)(rng)];
      if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
        g.suppress_arc(pick);
        continue;
      }
      const auto& h = g.arc(pick);
      auto next = std::find_if(h.actions.begin(), h.actions.end(), [](const Action& a) { return !a.finished; });
      if (g.record_action_finished(pick, next->name).done) {
        const ArcId done_arc[] = {pick};
        g.update_status(done_arc);
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

// Completing one arc per round, a run ends within |H| rounds. In general DAGs
// it may end Failed: finishing an arc suppresses every other consumer of its
// children, including ones on the same solution. When no node feeds two arcs
// that cannot happen and following the optimal path must reach Solved.
TEST(AndOrGraphProperty, TerminationWithinArcCount) {
  std::mt19937_64 rng(11);
  auto run = [](AndOrGraph g) {
    std::size_t rounds = 0;
    while (g.status().kind == StatusKind::InProgress) {
      std::optional<ArcId> next;
      try {
        for (ArcId a : g.optimal_path().arcs) {
          if (g.arc(a).feasible) {
            next = a;
            break;
          }
        }
      } catch (const Error&) {
      }
      if (!next) next = g.feasible_sets().arcs.front();
      for (const auto& a : g.arc(*next).actions) g.record_action_finished(*next, a.name);
      const ArcId done[] = {*next};
      g.update_status(done);
      ++rounds;
    }
    return std::pair{g.status().kind, rounds};
  };
  for (int model = 0; model < 300; ++model) {
    auto g = load_graph(testing::random_model(rng));
    const auto [kind, rounds] = run(g);
    EXPECT_NE(kind, StatusKind::InProgress);
    EXPECT_LE(rounds, g.arc_count());
  }
  for (int model = 0; model < 300; ++model) {
    auto g = load_graph(testing::random_tree_model(rng));
    const auto [kind, rounds] = run(g);
    EXPECT_EQ(kind, StatusKind::Solved) << g.dump();
    EXPECT_LE(rounds, g.arc_count());
  }
}

}  // namespace
}  // namespace coplan

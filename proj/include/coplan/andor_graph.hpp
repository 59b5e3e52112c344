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

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coplan/cooperation_model.hpp"

namespace coplan {

template <class Tag>
struct Index {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const Index&) const = default;
};

using NodeId = Index<struct NodeTag>;
using ArcId = Index<struct ArcTag>;

struct Action {
  std::string name;
  AgentKind agent = AgentKind::Human;
  std::uint32_t order = 0;
  bool finished = false;
};

struct Node {
  std::string name;
  double weight = 0.0;
  bool solved = false;
  bool feasible = false;
  bool is_leaf = false;
  bool is_root = false;
  std::vector<ArcId> incoming;  // arcs with this node as parent
  std::vector<ArcId> outgoing;  // arcs with this node among their children
};

struct HyperArc {
  std::string name;
  NodeId parent;
  std::vector<NodeId> children;  // ascending index, non-empty
  double weight = 0.0;
  std::vector<Action> actions;   // actions[i].order == i
  bool done = false;
  bool feasible = false;
  bool suppressed = false;
};

struct ActionRef {
  ArcId arc;
  std::uint32_t order = 0;

  bool operator==(const ActionRef&) const = default;
};

/// One complete leaf-to-root solution: exactly one incoming arc for every
/// non-leaf node it requires. `arcs` is in execution order (an arc comes after
/// every arc producing one of its children); `nodes` lists leaves first and
/// ends with the root.
struct CooperationPath {
  std::vector<NodeId> nodes;
  std::vector<ArcId> arcs;
  double cost = 0.0;
  std::vector<ActionRef> action_sequence;
};

enum class StatusKind { InProgress, Solved, Failed };

std::string_view to_string(StatusKind kind);

struct FeasibleSets {
  std::vector<NodeId> nodes;
  std::vector<ArcId> arcs;
};

struct GraphStatus {
  StatusKind kind = StatusKind::InProgress;
  std::vector<NodeId> feasible_nodes;
  std::vector<ArcId> feasible_arcs;
};

struct ArcProgress {
  std::size_t remaining = 0;
  bool done = false;
};

inline constexpr std::size_t kDefaultPathCap = std::size_t{1} << 20;
inline constexpr double kCostTolerance = 1e-9;

class AndOrGraph {
 public:
  /// Offline phase, first half: validates the model and initialises node,
  /// arc and feasibility state. Paths are attached separately.
  static AndOrGraph build(const GraphSpec& spec);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  const Node& node(NodeId id) const;
  const HyperArc& arc(ArcId id) const;
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const HyperArc> arcs() const { return arcs_; }
  NodeId root() const { return root_; }
  const std::string& name() const { return name_; }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<ArcId> find_arc(std::string_view name) const;
  NodeId node_id(std::string_view name) const;  // throws UnknownMember
  ArcId arc_id(std::string_view name) const;    // throws UnknownMember
  const Action& action(ActionRef ref) const;

  /// Arc indices in an order compatible with the children-to-parent relation.
  std::span<const ArcId> topological_arcs() const { return topo_arcs_; }

  // ---- offline paths -------------------------------------------------------

  /// Attaches the enumerated path list (sorted by cost, then arc names).
  void load_paths(std::vector<CooperationPath> paths);
  bool has_paths() const { return paths_ != nullptr; }
  std::span<const CooperationPath> paths() const;

  // ---- online phase --------------------------------------------------------

  /// Marks the lowest-order unfinished action of `arc` finished. When it was
  /// the last one the arc becomes done; the caller then runs update_status.
  ArcProgress record_action_finished(ArcId arc, std::string_view action);

  /// Propagates newly done arcs: solves their parents, suppresses arcs that
  /// share a child with them and recomputes feasibility.
  GraphStatus update_status(std::span<const ArcId> newly_done);

  /// Abandons an arc that will not be completed.
  GraphStatus suppress_arc(ArcId arc);

  FeasibleSets feasible_sets() const;
  GraphStatus status() const;
  bool solved() const { return nodes_[root_.value].solved; }

  /// A path stays viable while its leaves are solved and each of its arcs is
  /// either done, or not suppressed with an unsolved parent.
  bool is_viable(const CooperationPath& path) const;
  bool arc_viable(ArcId arc) const;

  /// Minimum-cost viable path; its action_sequence holds pending actions only.
  CooperationPath optimal_path() const;
  /// Minimum-cost viable path that uses `arc`, if any.
  std::optional<CooperationPath> optimal_path_through(ArcId arc) const;
  /// Same path with finished actions dropped from its action sequence.
  CooperationPath pending_view(const CooperationPath& path) const;

  /// Deterministic, line-oriented dump of the full mutable state.
  std::string dump() const;

 private:
  AndOrGraph() = default;
  void recompute_feasibility();
  void advance_cursor();

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<HyperArc> arcs_;
  std::vector<ArcId> topo_arcs_;
  NodeId root_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::unordered_map<std::string, ArcId> arc_index_;
  std::shared_ptr<const std::vector<CooperationPath>> paths_;
  // Viability only ever shrinks, so the first viable path in sorted order can
  // be tracked with a forward-only cursor.
  std::size_t optimal_cursor_ = 0;
};

/// Exhaustive offline enumeration of every cooperation path, sorted ascending
/// by cost with ties ordered by the sorted list of arc names.
std::vector<CooperationPath> enumerate_paths(const AndOrGraph& graph,
                                             std::size_t cap = kDefaultPathCap);

/// build + enumerate + load in one call.
AndOrGraph load_graph(const GraphSpec& spec, std::size_t cap = kDefaultPathCap);

double path_cost(const AndOrGraph& graph, const CooperationPath& path);
bool path_equal(const CooperationPath& a, const CooperationPath& b);
bool path_equivalent(const CooperationPath& a, const CooperationPath& b);

std::vector<std::string> arc_names(const AndOrGraph& graph, std::span<const ArcId> arcs);
std::vector<std::string> node_names(const AndOrGraph& graph, std::span<const NodeId> nodes);

}  // namespace coplan

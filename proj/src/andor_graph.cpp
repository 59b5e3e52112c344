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

#include "coplan/andor_graph.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "coplan/error.hpp"

namespace coplan {

namespace {

std::string format_weight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(StatusKind kind) {
  switch (kind) {
    case StatusKind::InProgress: return "in_progress";
    case StatusKind::Solved: return "solved";
    case StatusKind::Failed: return "failed";
  }
  return "unknown";
}

AndOrGraph AndOrGraph::build(const GraphSpec& spec) {
  AndOrGraph g;
  g.name_ = spec.name;

  std::optional<NodeId> root;
  for (const auto& ns : spec.nodes) {
    if (ns.weight < 0.0) {
      throw Error(ErrorCode::SchemaError, "node '" + ns.name + "' has a negative weight");
    }
    NodeId id{static_cast<std::uint32_t>(g.nodes_.size())};
    if (!g.node_index_.emplace(ns.name, id).second) {
      throw Error(ErrorCode::DuplicateName, "node '" + ns.name + "' declared twice");
    }
    Node n;
    n.name = ns.name;
    n.weight = ns.weight;
    n.solved = ns.solved;
    n.is_root = ns.root;
    if (ns.root) {
      if (root) {
        throw Error(ErrorCode::MultipleRoots,
                    "nodes '" + g.nodes_[root->value].name + "' and '" + ns.name + "' are both roots");
      }
      root = id;
    }
    g.nodes_.push_back(std::move(n));
  }
  if (!root) throw Error(ErrorCode::NoRoot, "model declares no root node");
  g.root_ = *root;

  for (const auto& as : spec.arcs) {
    ArcId id{static_cast<std::uint32_t>(g.arcs_.size())};
    if (!g.arc_index_.emplace(as.name, id).second) {
      throw Error(ErrorCode::DuplicateName, "arc '" + as.name + "' declared twice");
    }
    if (as.weight < 0.0) {
      throw Error(ErrorCode::SchemaError, "arc '" + as.name + "' has a negative weight");
    }
    auto parent = g.find_node(as.parent);
    if (!parent) {
      throw Error(ErrorCode::DanglingReference,
                  "arc '" + as.name + "' names unknown parent '" + as.parent + "'");
    }
    if (as.children.empty()) {
      throw Error(ErrorCode::EmptyChildren, "arc '" + as.name + "' has no children");
    }
    if (as.actions.empty()) {
      throw Error(ErrorCode::SchemaError, "arc '" + as.name + "' has no actions");
    }
    HyperArc arc;
    arc.name = as.name;
    arc.parent = *parent;
    arc.weight = as.weight;
    for (const auto& cname : as.children) {
      auto child = g.find_node(cname);
      if (!child) {
        throw Error(ErrorCode::DanglingReference,
                    "arc '" + as.name + "' names unknown child '" + cname + "'");
      }
      if (*child == *parent) {
        throw Error(ErrorCode::CyclicGraph, "arc '" + as.name + "' lists its parent as a child");
      }
      if (std::find(arc.children.begin(), arc.children.end(), *child) != arc.children.end()) {
        throw Error(ErrorCode::DuplicateName,
                    "arc '" + as.name + "' lists child '" + cname + "' twice");
      }
      arc.children.push_back(*child);
    }
    std::sort(arc.children.begin(), arc.children.end());
    std::unordered_set<std::string> action_names;
    for (const auto& act : as.actions) {
      if (!action_names.insert(act.name).second) {
        throw Error(ErrorCode::DuplicateName,
                    "arc '" + as.name + "' lists action '" + act.name + "' twice");
      }
      arc.actions.push_back(Action{act.name, act.agent,
                                   static_cast<std::uint32_t>(arc.actions.size()), false});
    }
    g.nodes_[parent->value].incoming.push_back(id);
    for (NodeId c : arc.children) g.nodes_[c.value].outgoing.push_back(id);
    g.arcs_.push_back(std::move(arc));
  }

  for (auto& n : g.nodes_) {
    n.is_leaf = n.incoming.empty();
    if (!n.is_leaf && n.solved) {
      throw Error(ErrorCode::InvalidInitialState,
                  "node '" + n.name + "' has incoming arcs and cannot start solved");
    }
    std::sort(n.incoming.begin(), n.incoming.end(), [&](ArcId a, ArcId b) {
      return g.arcs_[a.value].name < g.arcs_[b.value].name;
    });
  }

  // Kahn's algorithm on the child -> parent relation; lowest index first so
  // the resulting order is deterministic.
  std::vector<std::size_t> pending(g.nodes_.size(), 0);
  for (const auto& arc : g.arcs_) pending[arc.parent.value] += arc.children.size();
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::uint32_t i = 0; i < g.nodes_.size(); ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> rank(g.nodes_.size(), 0);
  std::size_t visited = 0;
  while (!ready.empty()) {
    std::uint32_t n = ready.top();
    ready.pop();
    rank[n] = visited++;
    for (ArcId a : g.nodes_[n].outgoing) {
      auto p = g.arcs_[a.value].parent.value;
      if (--pending[p] == 0) ready.push(p);
    }
  }
  if (visited != g.nodes_.size()) {
    throw Error(ErrorCode::CyclicGraph, "arc relation contains a cycle");
  }

  g.topo_arcs_.reserve(g.arcs_.size());
  for (std::uint32_t i = 0; i < g.arcs_.size(); ++i) g.topo_arcs_.push_back(ArcId{i});
  std::stable_sort(g.topo_arcs_.begin(), g.topo_arcs_.end(), [&](ArcId a, ArcId b) {
    return rank[g.arcs_[a.value].parent.value] < rank[g.arcs_[b.value].parent.value];
  });

  g.recompute_feasibility();
  return g;
}

const Node& AndOrGraph::node(NodeId id) const {
  if (id.value >= nodes_.size()) {
    throw Error(ErrorCode::UnknownMember, "node index " + std::to_string(id.value));
  }
  return nodes_[id.value];
}

const HyperArc& AndOrGraph::arc(ArcId id) const {
  if (id.value >= arcs_.size()) {
    throw Error(ErrorCode::UnknownMember, "arc index " + std::to_string(id.value));
  }
  return arcs_[id.value];
}

std::optional<NodeId> AndOrGraph::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArcId> AndOrGraph::find_arc(std::string_view name) const {
  auto it = arc_index_.find(std::string(name));
  if (it == arc_index_.end()) return std::nullopt;
  return it->second;
}

NodeId AndOrGraph::node_id(std::string_view name) const {
  auto id = find_node(name);
  if (!id) throw Error(ErrorCode::UnknownMember, "no node named '" + std::string(name) + "'");
  return *id;
}

ArcId AndOrGraph::arc_id(std::string_view name) const {
  auto id = find_arc(name);
  if (!id) throw Error(ErrorCode::UnknownMember, "no arc named '" + std::string(name) + "'");
  return *id;
}

const Action& AndOrGraph::action(ActionRef ref) const {
  const auto& a = arc(ref.arc);
  if (ref.order >= a.actions.size()) {
    throw Error(ErrorCode::UnknownMember, "arc '" + a.name + "' has no action #" + std::to_string(ref.order));
  }
  return a.actions[ref.order];
}

void AndOrGraph::load_paths(std::vector<CooperationPath> paths) {
  paths_ = std::make_shared<const std::vector<CooperationPath>>(std::move(paths));
  optimal_cursor_ = 0;
  advance_cursor();
}

std::span<const CooperationPath> AndOrGraph::paths() const {
  if (!paths_) throw Error(ErrorCode::PathsNotLoaded, "offline path enumeration has not run");
  return *paths_;
}

ArcProgress AndOrGraph::record_action_finished(ArcId arc_id, std::string_view action_name) {
  (void)arc(arc_id);
  HyperArc& h = arcs_[arc_id.value];
  auto it = std::find_if(h.actions.begin(), h.actions.end(),
                         [&](const Action& x) { return x.name == action_name; });
  if (it == h.actions.end()) {
    throw Error(ErrorCode::UnknownAction,
                "arc '" + h.name + "' has no action '" + std::string(action_name) + "'");
  }
  if (!h.feasible) {
    throw Error(ErrorCode::ArcNotFeasible, "arc '" + h.name + "' is not feasible");
  }
  if (it->finished) {
    throw Error(ErrorCode::OutOfOrder,
                "action '" + it->name + "' on arc '" + h.name + "' already finished");
  }
  auto next = std::find_if(h.actions.begin(), h.actions.end(),
                           [](const Action& x) { return !x.finished; });
  if (next != it) {
    throw Error(ErrorCode::OutOfOrder, "action '" + it->name + "' on arc '" + h.name +
                                           "' precedes unfinished '" + next->name + "'");
  }
  it->finished = true;
  std::size_t remaining = static_cast<std::size_t>(
      std::count_if(h.actions.begin(), h.actions.end(), [](const Action& x) { return !x.finished; }));
  if (remaining == 0) {
    h.done = true;
    recompute_feasibility();
  }
  return ArcProgress{remaining, h.done};
}

GraphStatus AndOrGraph::update_status(std::span<const ArcId> newly_done) {
  for (ArcId id : newly_done) {
    if (!arc(id).done) {
      throw Error(ErrorCode::ArcNotDone, "arc '" + arcs_[id.value].name + "' is not done");
    }
  }
  for (ArcId id : newly_done) {
    nodes_[arcs_[id.value].parent.value].solved = true;
  }
  for (ArcId id : newly_done) {
    for (NodeId c : arcs_[id.value].children) {
      for (ArcId other : nodes_[c.value].outgoing) {
        if (other != id) arcs_[other.value].suppressed = true;
      }
    }
  }
  recompute_feasibility();
  advance_cursor();
  return status();
}

GraphStatus AndOrGraph::suppress_arc(ArcId id) {
  (void)arc(id);
  arcs_[id.value].suppressed = true;
  recompute_feasibility();
  advance_cursor();
  return status();
}

void AndOrGraph::recompute_feasibility() {
  const bool finished = nodes_[root_.value].solved;
  for (auto& h : arcs_) {
    h.feasible = !finished && !h.done && !h.suppressed && !nodes_[h.parent.value].solved &&
                 std::all_of(h.children.begin(), h.children.end(),
                             [&](NodeId c) { return nodes_[c.value].solved; });
  }
  for (auto& n : nodes_) {
    n.feasible = std::any_of(n.incoming.begin(), n.incoming.end(),
                             [&](ArcId a) { return arcs_[a.value].feasible; });
  }
}

FeasibleSets AndOrGraph::feasible_sets() const {
  FeasibleSets sets;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feasible) sets.nodes.push_back(NodeId{i});
  }
  for (std::uint32_t i = 0; i < arcs_.size(); ++i) {
    if (arcs_[i].feasible) sets.arcs.push_back(ArcId{i});
  }
  return sets;
}

GraphStatus AndOrGraph::status() const {
  auto sets = feasible_sets();
  GraphStatus st;
  if (solved()) {
    st.kind = StatusKind::Solved;
  } else if (sets.nodes.empty() && sets.arcs.empty()) {
    st.kind = StatusKind::Failed;
  } else {
    st.kind = StatusKind::InProgress;
  }
  st.feasible_nodes = std::move(sets.nodes);
  st.feasible_arcs = std::move(sets.arcs);
  return st;
}

bool AndOrGraph::arc_viable(ArcId id) const {
  const auto& h = arc(id);
  return h.done || (!h.suppressed && !nodes_[h.parent.value].solved);
}

bool AndOrGraph::is_viable(const CooperationPath& path) const {
  for (NodeId n : path.nodes) {
    const auto& node = this->node(n);
    if (node.is_leaf && !node.solved) return false;
  }
  return std::all_of(path.arcs.begin(), path.arcs.end(), [&](ArcId a) { return arc_viable(a); });
}

void AndOrGraph::advance_cursor() {
  if (!paths_) return;
  const auto& all = *paths_;
  while (optimal_cursor_ < all.size() && !is_viable(all[optimal_cursor_])) ++optimal_cursor_;
}

CooperationPath AndOrGraph::pending_view(const CooperationPath& path) const {
  CooperationPath out;
  out.nodes = path.nodes;
  out.arcs = path.arcs;
  out.cost = path.cost;
  for (const auto& ref : path.action_sequence) {
    if (!action(ref).finished) out.action_sequence.push_back(ref);
  }
  return out;
}

CooperationPath AndOrGraph::optimal_path() const {
  auto all = paths();
  if (optimal_cursor_ >= all.size()) {
    throw Error(ErrorCode::NoViablePath, "no cooperation path can still reach the root");
  }
  return pending_view(all[optimal_cursor_]);
}

std::optional<CooperationPath> AndOrGraph::optimal_path_through(ArcId id) const {
  (void)arc(id);
  auto all = paths();
  for (std::size_t i = optimal_cursor_; i < all.size(); ++i) {
    const auto& p = all[i];
    if (std::find(p.arcs.begin(), p.arcs.end(), id) != p.arcs.end() && is_viable(p)) {
      return pending_view(p);
    }
  }
  return std::nullopt;
}

std::string AndOrGraph::dump() const {
  std::vector<const Node*> ns;
  for (const auto& n : nodes_) ns.push_back(&n);
  std::sort(ns.begin(), ns.end(), [](const Node* a, const Node* b) { return a->name < b->name; });
  std::vector<const HyperArc*> hs;
  for (const auto& h : arcs_) hs.push_back(&h);
  std::sort(hs.begin(), hs.end(), [](const HyperArc* a, const HyperArc* b) { return a->name < b->name; });

  std::ostringstream out;
  out << "graph " << name_ << "\n";
  for (const Node* n : ns) {
    out << "node " << n->name << " weight=" << format_weight(n->weight) << " leaf=" << n->is_leaf
        << " root=" << n->is_root << " solved=" << n->solved << " feasible=" << n->feasible << "\n";
  }
  for (const HyperArc* h : hs) {
    std::vector<std::string> children;
    for (NodeId c : h->children) children.push_back(nodes_[c.value].name);
    std::sort(children.begin(), children.end());
    out << "arc " << h->name << " parent=" << nodes_[h->parent.value].name << " children=";
    for (std::size_t i = 0; i < children.size(); ++i) out << (i ? "," : "") << children[i];
    out << " weight=" << format_weight(h->weight) << " done=" << h->done << " feasible=" << h->feasible
        << " suppressed=" << h->suppressed << " actions=";
    for (std::size_t i = 0; i < h->actions.size(); ++i) {
      const auto& a = h->actions[i];
      out << (i ? "," : "") << a.name << ":" << to_string(a.agent) << ":" << (a.finished ? 1 : 0);
    }
    out << "\n";
  }
  out << "status " << to_string(status().kind) << "\n";
  return out.str();
}

double path_cost(const AndOrGraph& graph, const CooperationPath& path) {
  double cost = 0.0;
  for (NodeId n : path.nodes) cost += graph.node(n).weight;
  for (ArcId a : path.arcs) cost += graph.arc(a).weight;
  return cost;
}

bool path_equal(const CooperationPath& a, const CooperationPath& b) {
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return sorted(a.nodes) == sorted(b.nodes) && sorted(a.arcs) == sorted(b.arcs);
}

bool path_equivalent(const CooperationPath& a, const CooperationPath& b) {
  return std::abs(a.cost - b.cost) <= kCostTolerance;
}

std::vector<std::string> arc_names(const AndOrGraph& graph, std::span<const ArcId> arcs) {
  std::vector<std::string> out;
  out.reserve(arcs.size());
  for (ArcId a : arcs) out.push_back(graph.arc(a).name);
  return out;
}

std::vector<std::string> node_names(const AndOrGraph& graph, std::span<const NodeId> nodes) {
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (NodeId n : nodes) out.push_back(graph.node(n).name);
  return out;
}

AndOrGraph load_graph(const GraphSpec& spec, std::size_t cap) {
  auto g = AndOrGraph::build(spec);
  g.load_paths(enumerate_paths(g, cap));
  return g;
}

}  // namespace coplan

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>

#include "coplan/andor_graph.hpp"
#include "coplan/error.hpp"

namespace coplan {

namespace {

// Depth-first construction of solution graphs. Every required non-leaf node
// is assigned exactly one incoming arc; branching on that choice visits each
// distinct assignment once, including DAGs where a node is shared by several
// arcs of the same solution.
class PathEnumerator {
 public:
  PathEnumerator(const AndOrGraph& graph, std::size_t cap)
      : graph_(graph),
        cap_(cap),
        assigned_(graph.node_count(), -1),
        required_(graph.node_count(), false),
        topo_pos_(graph.arc_count(), 0) {
    auto topo = graph.topological_arcs();
    for (std::size_t i = 0; i < topo.size(); ++i) topo_pos_[topo[i].value] = i;
  }

  std::vector<CooperationPath> run() {
    const NodeId root = graph_.root();
    required_[root.value] = true;
    std::vector<NodeId> todo;
    if (!graph_.node(root).is_leaf) todo.push_back(root);
    expand(todo);
    return std::move(out_);
  }

 private:
  void expand(std::vector<NodeId>& todo) {
    if (todo.empty()) {
      emit();
      return;
    }
    const NodeId n = todo.back();
    todo.pop_back();
    for (ArcId a : graph_.node(n).incoming) {
      assigned_[n.value] = static_cast<std::int64_t>(a.value);
      std::size_t marked = 0;
      for (NodeId c : graph_.arc(a).children) {
        if (required_[c.value]) continue;
        required_[c.value] = true;
        newly_.push_back(c);
        ++marked;
        if (!graph_.node(c).is_leaf) todo.push_back(c);
      }
      expand(todo);
      for (std::size_t i = 0; i < marked; ++i) {
        NodeId c = newly_.back();
        newly_.pop_back();
        required_[c.value] = false;
        if (!graph_.node(c).is_leaf) todo.pop_back();
      }
    }
    assigned_[n.value] = -1;
    todo.push_back(n);
  }

  void emit() {
    if (out_.size() >= cap_) {
      throw Error(ErrorCode::PathExplosion,
                  "more than " + std::to_string(cap_) + " cooperation paths");
    }
    CooperationPath p;
    for (std::uint32_t i = 0; i < assigned_.size(); ++i) {
      if (required_[i] && assigned_[i] >= 0) {
        p.arcs.push_back(ArcId{static_cast<std::uint32_t>(assigned_[i])});
      }
    }
    std::sort(p.arcs.begin(), p.arcs.end(),
              [&](ArcId a, ArcId b) { return topo_pos_[a.value] < topo_pos_[b.value]; });
    for (std::uint32_t i = 0; i < required_.size(); ++i) {
      if (required_[i] && graph_.node(NodeId{i}).is_leaf) p.nodes.push_back(NodeId{i});
    }
    for (ArcId a : p.arcs) {
      p.nodes.push_back(graph_.arc(a).parent);
      const auto& h = graph_.arc(a);
      for (std::uint32_t k = 0; k < h.actions.size(); ++k) p.action_sequence.push_back({a, k});
    }
    p.cost = path_cost(graph_, p);
    out_.push_back(std::move(p));
  }

  const AndOrGraph& graph_;
  std::size_t cap_;
  std::vector<std::int64_t> assigned_;
  std::vector<bool> required_;
  std::vector<NodeId> newly_;
  std::vector<std::size_t> topo_pos_;
  std::vector<CooperationPath> out_;
};

}  // namespace

std::vector<CooperationPath> enumerate_paths(const AndOrGraph& graph, std::size_t cap) {
  auto paths = PathEnumerator(graph, cap).run();

  // Sort key: cost on a 1e-9 grid (so equivalent paths tie), then the sorted
  // list of arc names.
  struct Key {
    std::int64_t cost;
    std::vector<std::string_view> names;
  };
  std::vector<Key> keys;
  keys.reserve(paths.size());
  for (const auto& p : paths) {
    Key k{static_cast<std::int64_t>(std::llround(p.cost / kCostTolerance)), {}};
    for (ArcId a : p.arcs) k.names.push_back(graph.arc(a).name);
    std::sort(k.names.begin(), k.names.end());
    keys.push_back(std::move(k));
  }
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].cost != keys[b].cost) return keys[a].cost < keys[b].cost;
    return keys[a].names < keys[b].names;
  });
  std::vector<CooperationPath> sorted;
  sorted.reserve(paths.size());
  for (std::size_t i : order) sorted.push_back(std::move(paths[i]));
  return sorted;
}

}  // namespace coplan

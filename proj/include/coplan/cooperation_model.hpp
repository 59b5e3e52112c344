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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coplan {

enum class AgentKind { Human, Robot, Joint };

std::string_view to_string(AgentKind agent);
/// Accepts the lowercase model-file spelling ("human", "robot", "joint").
std::optional<AgentKind> parse_agent(std::string_view text);

inline constexpr std::string_view kModelVersion = "coplan-model/1";

struct NodeSpec {
  std::string name;
  double weight = 0.0;
  bool root = false;
  /// Only meaningful for leaves: the initial state of the cooperation.
  bool solved = false;

  bool operator==(const NodeSpec&) const = default;
};

struct ActionSpec {
  std::string name;
  AgentKind agent = AgentKind::Human;

  bool operator==(const ActionSpec&) const = default;
};

struct ArcSpec {
  std::string name;
  std::string parent;
  std::vector<std::string> children;
  double weight = 0.0;
  std::vector<ActionSpec> actions;

  bool operator==(const ArcSpec&) const = default;
};

struct GraphSpec {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::vector<ArcSpec> arcs;

  bool operator==(const GraphSpec&) const = default;
};

/// Parses a "coplan-model/1" document. Structural checks that need the whole
/// graph (cycles, dangling references) are left to graph construction.
GraphSpec parse_model(std::string_view text);

/// Canonical text: sorted keys, nodes and arcs sorted by name, children sorted,
/// actions in execution order, two-space indentation, trailing newline.
std::string serialize_model(const GraphSpec& spec);

GraphSpec load_model_file(const std::string& path);

/// Chain model for stacking `parts` items on a pallet. Each step i has a
/// robot-placed alternative h_i and an intervention alternative hw_i.
GraphSpec generate_palletization(int parts, double h_weight = 1.0, double hw_weight = 4.0);

}  // namespace coplan

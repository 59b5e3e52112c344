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

#include "coplan/cooperation_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coplan/error.hpp"

namespace coplan {

using nlohmann::json;

std::string_view to_string(AgentKind agent) {
  switch (agent) {
    case AgentKind::Human: return "human";
    case AgentKind::Robot: return "robot";
    case AgentKind::Joint: return "joint";
  }
  return "unknown";
}

std::optional<AgentKind> parse_agent(std::string_view text) {
  if (text == "human") return AgentKind::Human;
  if (text == "robot") return AgentKind::Robot;
  if (text == "joint") return AgentKind::Joint;
  return std::nullopt;
}

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema(where, "unknown field '" + key + "'");
    }
  }
}

std::string req_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) schema(where, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

double opt_number(const json& obj, const char* key, const std::string& where, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) schema(where, std::string("field '") + key + "' must be a number");
  double v = it->get<double>();
  if (v < 0.0) schema(where, std::string("field '") + key + "' must be non-negative");
  return v;
}

bool opt_bool(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) schema(where, std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

}  // namespace

GraphSpec parse_model(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw Error(ErrorCode::MissingRoot, "empty model document");
  }
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, line_col(text, e.byte) + ": " + e.what());
  }
  check_keys(doc, "model", {"version", "name", "nodes", "arcs"});
  if (req_string(doc, "version", "model") != kModelVersion) {
    schema("model", "unsupported version, expected '" + std::string(kModelVersion) + "'");
  }

  GraphSpec spec;
  spec.name = doc.contains("name") ? req_string(doc, "name", "model") : std::string();

  std::set<std::string> node_names;
  const json nodes = doc.value("nodes", json::array());
  if (!nodes.is_array()) schema("model", "'nodes' must be an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto& n = nodes[i];
    check_keys(n, where, {"name", "weight", "root", "solved"});
    NodeSpec ns;
    ns.name = req_string(n, "name", where);
    ns.weight = opt_number(n, "weight", where, 0.0);
    ns.root = opt_bool(n, "root", where);
    ns.solved = opt_bool(n, "solved", where);
    if (!node_names.insert(ns.name).second) {
      throw Error(ErrorCode::DuplicateName, where + ": node '" + ns.name + "' declared twice");
    }
    spec.nodes.push_back(std::move(ns));
  }

  std::set<std::string> arc_names;
  const json arcs = doc.value("arcs", json::array());
  if (!arcs.is_array()) schema("model", "'arcs' must be an array");
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::string where = "arcs[" + std::to_string(i) + "]";
    const auto& a = arcs[i];
    check_keys(a, where, {"name", "parent", "children", "weight", "actions"});
    ArcSpec as;
    as.name = req_string(a, "name", where);
    as.parent = req_string(a, "parent", where);
    as.weight = opt_number(a, "weight", where, 0.0);
    auto children = a.find("children");
    if (children == a.end() || !children->is_array()) schema(where, "'children' must be an array");
    for (const auto& c : *children) {
      if (!c.is_string()) schema(where, "child names must be strings");
      as.children.push_back(c.get<std::string>());
    }
    auto actions = a.find("actions");
    if (actions == a.end() || !actions->is_array() || actions->empty()) {
      schema(where, "'actions' must be a non-empty array");
    }
    for (std::size_t k = 0; k < actions->size(); ++k) {
      const std::string awhere = where + ".actions[" + std::to_string(k) + "]";
      const auto& act = (*actions)[k];
      check_keys(act, awhere, {"name", "agent"});
      ActionSpec spec_action;
      spec_action.name = req_string(act, "name", awhere);
      const std::string agent = req_string(act, "agent", awhere);
      auto kind = parse_agent(agent);
      if (!kind) throw Error(ErrorCode::UnknownAgent, awhere + ": agent '" + agent + "'");
      spec_action.agent = *kind;
      as.actions.push_back(std::move(spec_action));
    }
    if (!arc_names.insert(as.name).second) {
      throw Error(ErrorCode::DuplicateName, where + ": arc '" + as.name + "' declared twice");
    }
    spec.arcs.push_back(std::move(as));
  }

  std::size_t roots = static_cast<std::size_t>(
      std::count_if(spec.nodes.begin(), spec.nodes.end(), [](const NodeSpec& n) { return n.root; }));
  if (roots == 0) throw Error(ErrorCode::MissingRoot, "model declares no root node");
  if (roots > 1) throw Error(ErrorCode::MultipleRoots, "model declares " + std::to_string(roots) + " roots");
  return spec;
}

std::string serialize_model(const GraphSpec& spec) {
  json doc;
  doc["version"] = kModelVersion;
  doc["name"] = spec.name;

  std::vector<const NodeSpec*> nodes;
  for (const auto& n : spec.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->name < b->name; });
  json jnodes = json::array();
  for (const NodeSpec* n : nodes) {
    json jn;
    jn["name"] = n->name;
    jn["weight"] = n->weight;
    if (n->root) jn["root"] = true;
    if (n->solved) jn["solved"] = true;
    jnodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(jnodes);

  std::vector<const ArcSpec*> arcs;
  for (const auto& a : spec.arcs) arcs.push_back(&a);
  std::sort(arcs.begin(), arcs.end(), [](auto* a, auto* b) { return a->name < b->name; });
  json jarcs = json::array();
  for (const ArcSpec* a : arcs) {
    json ja;
    ja["name"] = a->name;
    ja["parent"] = a->parent;
    auto children = a->children;
    std::sort(children.begin(), children.end());
    ja["children"] = children;
    ja["weight"] = a->weight;
    json jactions = json::array();
    for (const auto& act : a->actions) {
      jactions.push_back(json{{"name", act.name}, {"agent", std::string(to_string(act.agent))}});
    }
    ja["actions"] = std::move(jactions);
    jarcs.push_back(std::move(ja));
  }
  doc["arcs"] = std::move(jarcs);
  return doc.dump(2) + "\n";
}

GraphSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

GraphSpec generate_palletization(int parts, double h_weight, double hw_weight) {
  if (parts < 1) throw Error(ErrorCode::InvalidK, "part count must be at least 1");
  if (h_weight < 0.0 || hw_weight < 0.0) {
    throw Error(ErrorCode::SchemaError, "arc weights must be non-negative");
  }
  using enum AgentKind;
  const std::vector<ActionSpec> robot_places = {
      {"inspect", Human},       {"deliver-part", Human}, {"approach-part", Robot},
      {"grasp", Robot},         {"approach-goal", Robot}, {"ungrasp", Robot},
      {"start-pose", Robot},
  };
  const std::vector<ActionSpec> human_places = {
      {"inspect", Human}, {"deliver-part", Human}, {"approach-part", Robot}, {"grasp", Robot},
      {"handover", Joint}, {"palletize", Human},   {"start-pose", Robot},
  };

  GraphSpec spec;
  spec.name = "palletization-" + std::to_string(parts);
  spec.nodes.push_back(NodeSpec{"empty-pallet", 0.0, false, true});
  for (int i = 1; i <= parts; ++i) {
    spec.nodes.push_back(NodeSpec{"pallet_" + std::to_string(i), 0.0, i == parts, false});
  }
  for (int i = 1; i <= parts; ++i) {
    const std::string prev = i == 1 ? "empty-pallet" : "pallet_" + std::to_string(i - 1);
    const std::string cur = "pallet_" + std::to_string(i);
    spec.arcs.push_back(ArcSpec{"h_" + std::to_string(i), cur, {prev}, h_weight, robot_places});
    spec.arcs.push_back(ArcSpec{"hw_" + std::to_string(i), cur, {prev}, hw_weight, human_places});
  }
  return spec;
}

}  // namespace coplan

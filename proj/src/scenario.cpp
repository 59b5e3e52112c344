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

// Scenario files: model reference plus agent configuration, JSON with a
// "coplan-scenario/1" version tag. See docs/scenario-format.md.

#include <fstream>
#include <sstream>

#include "coplan/error.hpp"
#include "coplan/sim_engine.hpp"

namespace coplan {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(where + ": unknown field '" + key + "'");
    }
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where + ": expected a number");
  return v.get<double>();
}

// A duration is either a constant number or a [lo, hi] uniform range.
DurationSpec duration(const json& v, const std::string& where) {
  if (v.is_number()) return DurationSpec::constant(v.get<double>());
  if (v.is_array() && v.size() == 2) {
    return DurationSpec::uniform(number(v[0], where), number(v[1], where));
  }
  bad(where + ": duration must be a number or [lo, hi]");
}

void merge_durations(DurationTable& table, const json& v, const std::string& where) {
  if (!v.is_object()) bad(where + ": expected an object of durations");
  for (const auto& [name, d] : v.items()) table[name] = duration(d, where + "." + name);
}

std::vector<std::string> strings(const json& v, const std::string& where) {
  if (!v.is_array()) bad(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) bad(where + ": expected an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

GraphSpec model_from(const json& v, const std::filesystem::path& base_dir) {
  check_keys(v, "model", {"path", "palletize", "inline"});
  if (v.size() != 1) bad("model: give exactly one of path, palletize, inline");
  try {
    if (v.contains("path")) {
      std::filesystem::path p = v["path"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_model_file(p.string());
    }
    if (v.contains("inline")) return parse_model(v["inline"].dump());
    const json& pal = v["palletize"];
    check_keys(pal, "model.palletize", {"parts", "w_h", "w_hw"});
    if (!pal.contains("parts") || !pal["parts"].is_number_integer()) {
      bad("model.palletize: 'parts' must be an integer");
    }
    return generate_palletization(pal["parts"].get<int>(),
                                  pal.contains("w_h") ? number(pal["w_h"], "w_h") : 1.0,
                                  pal.contains("w_hw") ? number(pal["w_hw"], "w_hw") : 4.0);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    bad(std::string("model: ") + e.what());
  }
}

}  // namespace

AgentProfile default_agent_profile() {
  AgentProfile p;
  p.human.durations = {
      {"inspect", DurationSpec::constant(3.0)},
      {"deliver-part", DurationSpec::constant(2.0)},
      {"handover", DurationSpec::constant(4.0)},
      {"palletize", DurationSpec::constant(5.0)},
  };
  p.robot.durations = {
      {"approach-part", DurationSpec::constant(20.0)},
      {"grasp", DurationSpec::constant(3.0)},
      {"approach-goal", DurationSpec::constant(30.0)},
      {"ungrasp", DurationSpec::constant(2.0)},
      {"start-pose", DurationSpec::constant(25.0)},
  };
  return p;
}

std::vector<ScriptStep> parse_script(const json& doc) {
  if (!doc.is_array()) bad("script: expected an array of steps");
  std::vector<ScriptStep> steps;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "script[" + std::to_string(i) + "]";
    const json& s = doc[i];
    check_keys(s, where, {"stage", "kind", "action", "instead_of"});
    ScriptStep step;
    if (!s.contains("stage") || !s["stage"].is_number_integer()) bad(where + ": 'stage' must be an integer");
    step.stage = s["stage"].get<int>();
    const std::string kind = s.value("kind", "");
    if (kind == "intervene") {
      step.kind = ScriptStep::Kind::Intervene;
    } else if (kind == "perform") {
      step.kind = ScriptStep::Kind::Perform;
      if (!s.contains("action") || !s.contains("instead_of")) {
        bad(where + ": 'perform' needs 'action' and 'instead_of'");
      }
      step.action = s["action"].get<std::string>();
      step.instead_of = s["instead_of"].get<std::string>();
    } else if (kind == "ignore") {
      step.kind = ScriptStep::Kind::Ignore;
    } else {
      bad(where + ": kind must be intervene, perform or ignore");
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

AgentProfile parse_agent_profile(const json& doc, const AgentProfile& base) {
  AgentProfile p = base;
  if (doc.contains("human")) {
    const json& h = doc["human"];
    check_keys(h, "human", {"policy", "intervention_probability", "script", "stop_fraction",
                            "transport_action", "durations"});
    if (h.contains("policy")) {
      const std::string policy = h["policy"].get<std::string>();
      if (policy == "compliant") {
        p.human.kind = HumanPolicyKind::Compliant;
      } else if (policy == "intervene") {
        p.human.kind = HumanPolicyKind::Interventionist;
      } else if (policy == "script") {
        p.human.kind = HumanPolicyKind::Scripted;
      } else if (policy == "unresponsive") {
        p.human.kind = HumanPolicyKind::Unresponsive;
      } else {
        bad("human.policy: unknown policy '" + policy + "'");
      }
    }
    if (h.contains("intervention_probability")) {
      p.human.intervention_probability = number(h["intervention_probability"], "human.intervention_probability");
    }
    if (h.contains("script")) p.human.script = parse_script(h["script"]);
    if (h.contains("stop_fraction")) p.human.stop_fraction = number(h["stop_fraction"], "human.stop_fraction");
    if (h.contains("transport_action")) p.human.transport_action = h["transport_action"].get<std::string>();
    if (h.contains("durations")) merge_durations(p.human.durations, h["durations"], "human.durations");
  }
  if (doc.contains("robot")) {
    const json& r = doc["robot"];
    check_keys(r, "robot", {"durations", "grasp_failure_probability", "grasp_action",
                            "end_effector_speed_mm_s", "stop_force_n"});
    if (r.contains("durations")) merge_durations(p.robot.durations, r["durations"], "robot.durations");
    if (r.contains("grasp_failure_probability")) {
      p.robot.grasp_failure_probability = number(r["grasp_failure_probability"], "robot.grasp_failure_probability");
    }
    if (r.contains("grasp_action")) p.robot.grasp_action = r["grasp_action"].get<std::string>();
    if (r.contains("end_effector_speed_mm_s")) {
      p.robot.end_effector_speed_mm_s = number(r["end_effector_speed_mm_s"], "robot.end_effector_speed_mm_s");
    }
    if (r.contains("stop_force_n")) p.robot.stop_force_n = number(r["stop_force_n"], "robot.stop_force_n");
  }
  if (doc.contains("perception")) {
    const json& q = doc["perception"];
    check_keys(q, "perception", {"latency", "actions"});
    if (q.contains("latency")) p.perception.latency = duration(q["latency"], "perception.latency");
    if (q.contains("actions")) p.perception.actions = strings(q["actions"], "perception.actions");
  }
  return p;
}

SimConfig parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  try {
    check_keys(doc, "scenario", {"version", "description", "model", "human", "robot", "perception",
                                 "cohort", "manager_latency", "timeout", "trials", "seed", "threads"});
    if (doc.value("version", "") != kScenarioVersion) {
      bad("scenario: version must be '" + std::string(kScenarioVersion) + "'");
    }
    SimConfig c;
    if (!doc.contains("model")) bad("scenario: 'model' is required");
    c.model = model_from(doc["model"], base_dir);
    c.agents = parse_agent_profile(doc, default_agent_profile());
    if (doc.contains("cohort")) {
      if (!doc["cohort"].is_array()) bad("cohort: expected an array");
      for (const auto& member : doc["cohort"]) {
        check_keys(member, "cohort[]", {"name", "human", "robot", "perception"});
        c.cohort.push_back(parse_agent_profile(member, c.agents));
      }
    }
    if (doc.contains("manager_latency")) c.manager_latency_s = number(doc["manager_latency"], "manager_latency");
    if (doc.contains("timeout")) c.timeout_s = number(doc["timeout"], "timeout");
    if (doc.contains("trials")) c.trials = doc["trials"].get<int>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("threads")) c.threads = doc["threads"].get<unsigned>();
    validate(c);
    return c;
  } catch (const json::exception& e) {
    bad(std::string("scenario: ") + e.what());
  }
}

SimConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("scenario '" + path + "': " + e.what());
  }
  return parse_scenario(doc, std::filesystem::path(path).parent_path());
}

}  // namespace coplan

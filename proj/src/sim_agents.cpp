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

#include "coplan/sim_agents.hpp"

#include <algorithm>
#include <cmath>

#include "coplan/error.hpp"

namespace coplan {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

namespace {

void check_table(const DurationTable& table, const std::string& owner) {
  for (const auto& [name, d] : table) {
    if (!(d.lo >= 0.0) || !(d.hi >= d.lo) || !std::isfinite(d.hi)) {
      throw Error(ErrorCode::ConfigError, owner + " duration for '" + name + "' is invalid");
    }
  }
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigError, what + " must lie in [0, 1]");
}

const DurationSpec& lookup(const DurationTable& table, const std::string& action, const char* owner) {
  auto it = table.find(action);
  if (it == table.end()) {
    throw Error(ErrorCode::UnknownAction, std::string(owner) + " has no duration for '" + action + "'");
  }
  return it->second;
}

}  // namespace

void validate(const HumanPolicy& policy) {
  check_probability(policy.intervention_probability, "intervention probability");
  check_probability(policy.stop_fraction, "stop fraction");
  check_table(policy.durations, "human");
  for (const auto& step : policy.script) {
    if (step.stage < 1) throw Error(ErrorCode::ConfigError, "script stages are 1-based");
  }
}

void validate(const RobotModel& model) {
  check_probability(model.grasp_failure_probability, "grasp failure probability");
  check_table(model.durations, "robot");
  if (!(model.end_effector_speed_mm_s > 0.0)) {
    throw Error(ErrorCode::ConfigError, "end-effector speed must be positive");
  }
}

void validate(const PerceptionModel& model) {
  check_table(DurationTable{{"perception", model.latency}}, "perception");
}

HumanMove human_decide(const HumanPolicy& policy, const Suggestion& suggestion,
                       std::span<const std::string> alternatives, StageContext ctx,
                       Rng& duration_rng) {
  if (suggestion.agent == AgentKind::Robot) {
    throw Error(ErrorCode::ProtocolViolation, "robot actions are not decided by the human");
  }
  if (policy.kind == HumanPolicyKind::Unresponsive) return HumanMove{false, {}, 0.0, false};

  HumanMove move{true, suggestion.action.name, 0.0, false};
  if (policy.kind == HumanPolicyKind::Scripted) {
    for (const auto& step : policy.script) {
      if (step.stage != ctx.stage) continue;
      if (step.kind == ScriptStep::Kind::Ignore) return HumanMove{false, {}, 0.0, false};
      if (step.kind == ScriptStep::Kind::Perform && step.instead_of == suggestion.action.name) {
        if (std::find(alternatives.begin(), alternatives.end(), step.action) == alternatives.end()) {
          throw Error(ErrorCode::NoFeasibleChoice,
                      "scripted action '" + step.action + "' is not feasible at stage " +
                          std::to_string(ctx.stage));
        }
        move.action = step.action;
        move.is_deviation = step.action != suggestion.action.name;
        break;
      }
    }
  }
  move.duration = lookup(policy.durations, move.action, "human").sample(duration_rng);
  return move;
}

std::optional<double> human_stop_offset(const HumanPolicy& policy, const Suggestion& robot_action,
                                        double robot_duration, StageContext ctx,
                                        Rng& decision_rng) {
  if (robot_action.action.name != policy.transport_action) return std::nullopt;
  bool stop = false;
  switch (policy.kind) {
    case HumanPolicyKind::Interventionist:
      stop = decision_rng.bernoulli(policy.intervention_probability);
      break;
    case HumanPolicyKind::Scripted:
      stop = std::any_of(policy.script.begin(), policy.script.end(), [&](const ScriptStep& s) {
        return s.kind == ScriptStep::Kind::Intervene && s.stage == ctx.stage;
      });
      break;
    default:
      break;
  }
  if (!stop) return std::nullopt;
  return policy.stop_fraction * robot_duration;
}

RobotOutcome robot_execute(const RobotModel& model, const Action& action, Rng& rng) {
  if (action.agent != AgentKind::Robot) {
    throw Error(ErrorCode::ProtocolViolation, "'" + action.name + "' is not a robot action");
  }
  RobotOutcome out;
  out.duration = lookup(model.durations, action.name, "robot").sample(rng);
  if (action.name == model.grasp_action && model.grasp_failure_probability > 0.0 &&
      rng.bernoulli(model.grasp_failure_probability)) {
    out.outcome = Outcome::Failure;
  }
  return out;
}

}  // namespace coplan

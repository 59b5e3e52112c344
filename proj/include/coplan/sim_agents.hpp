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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coplan/task_manager.hpp"

namespace coplan {

/// SplitMix64 finaliser; used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed for stream `index` under `master`: splitmix64(master + (index+1)*golden).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// 53-bit uniform in [0, 1); portable across standard libraries.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Constant (lo == hi) or uniform [lo, hi] duration in seconds.
struct DurationSpec {
  double lo = 0.0;
  double hi = 0.0;

  static DurationSpec constant(double v) { return {v, v}; }
  static DurationSpec uniform(double lo, double hi) { return {lo, hi}; }
  bool is_constant() const { return lo == hi; }
  double mean() const { return 0.5 * (lo + hi); }
  /// Constant specs never consume randomness.
  double sample(Rng& rng) const { return is_constant() ? lo : rng.uniform(lo, hi); }

  bool operator==(const DurationSpec&) const = default;
};

using DurationTable = std::map<std::string, DurationSpec, std::less<>>;

enum class HumanPolicyKind { Compliant, Interventionist, Scripted, Unresponsive };

struct ScriptStep {
  enum class Kind {
    Intervene,  // stop the robot during its transport action at `stage`
    Perform,    // do `action` instead of the suggested `instead_of`
    Ignore,     // never answer the human suggestion at `stage`
  };
  int stage = 1;
  Kind kind = Kind::Intervene;
  std::string action;
  std::string instead_of;
};

struct HumanPolicy {
  HumanPolicyKind kind = HumanPolicyKind::Compliant;
  double intervention_probability = 0.0;
  std::vector<ScriptStep> script;
  DurationTable durations;
  /// Fraction of the transport action elapsed when the operator stops the robot.
  double stop_fraction = 0.5;
  std::string transport_action = "approach-goal";
};

struct PerceptionModel {
  /// Time for the perception layer to recognise the outcome of a human action.
  DurationSpec latency;
  std::vector<std::string> actions = {"deliver-part"};
};

struct RobotModel {
  DurationTable durations;
  double grasp_failure_probability = 0.0;
  std::string grasp_action = "grasp";
  double end_effector_speed_mm_s = 250.0;
  /// Informational: contact force that triggers a protective stop.
  double stop_force_n = 100.0;
};

void validate(const HumanPolicy& policy);
void validate(const RobotModel& model);
void validate(const PerceptionModel& model);

/// 1-based index of the cooperation step being worked on (completed arcs + 1).
struct StageContext {
  int stage = 1;
};

struct HumanMove {
  bool responds = true;
  std::string action;
  double duration = 0.0;
  bool is_deviation = false;
};

/// Reaction to a suggestion addressed to the human (or a joint action).
/// `alternatives` are the next actions of the currently feasible arcs.
HumanMove human_decide(const HumanPolicy& policy, const Suggestion& suggestion,
                       std::span<const std::string> alternatives, StageContext ctx,
                       Rng& duration_rng);

/// Called when a robot action starts. Returns the offset (seconds from the
/// start of the action) at which the operator stops the robot, if they do.
/// Draws from `decision_rng` only for the transport action.
std::optional<double> human_stop_offset(const HumanPolicy& policy, const Suggestion& robot_action,
                                        double robot_duration, StageContext ctx,
                                        Rng& decision_rng);

struct RobotOutcome {
  Outcome outcome = Outcome::Success;
  double duration = 0.0;
};

RobotOutcome robot_execute(const RobotModel& model, const Action& action, Rng& rng);

}  // namespace coplan

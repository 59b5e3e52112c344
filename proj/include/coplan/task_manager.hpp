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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coplan/andor_graph.hpp"
#include "coplan/virtual_time.hpp"

namespace coplan {

/// How strongly a suggestion binds its addressee: the robot is commanded,
/// the human is only advised, a joint action needs both sides.
enum class Binding { Imposed, Suggested, Coordinated };
enum class Outcome { Success, Failure };
enum class Phase { Running, Intervention, Done, Failed };

std::string_view to_string(Binding b);
std::string_view to_string(Outcome o);
std::string_view to_string(Phase p);
Binding binding_for(AgentKind agent);

struct Suggestion {
  std::uint64_t seq = 0;
  ArcId arc;
  Action action;
  AgentKind agent = AgentKind::Human;
  Binding binding = Binding::Suggested;
  Tick issued_at = 0;
};

struct Ack {
  std::uint64_t seq = 0;
  /// Optional: when absent the manager resolves the arc from the action name.
  std::optional<ArcId> arc;
  std::string action;
  Outcome outcome = Outcome::Success;
  AgentKind performed_by = AgentKind::Human;
  Tick received_at = 0;
};

struct StopEvent {
  Tick at = 0;
};

struct TimingGap {
  Tick ack_prev = 0;  // T_ack(a_{i-1})
  Tick next = 0;      // T_next(a_i)
};

struct TimingRecord {
  std::vector<TimingGap> gaps;
  Tick total = 0;  // T_m
  /// Host time spent inside the planner; informational only.
  double wall_planner_seconds = 0.0;
};

enum class AckKind { Next, Done, Failed };

struct AckResult {
  AckKind kind = AckKind::Next;
  std::optional<Suggestion> next;
  std::string note;
};

/// Reason codes reported when a cooperation run stops without solving.
inline constexpr std::string_view kReasonRobotFailure = "robot_action_failure";
inline constexpr std::string_view kReasonHumanFailure = "human_action_failure";
inline constexpr std::string_view kReasonGraphInfeasible = "graph_infeasible";

/// Drives one cooperation run: proposes the next action on the optimal path,
/// consumes acknowledgements, follows human deviations and switches paths
/// when a robot action fails. Turn-taking: at most one suggestion is pending.
class TaskManager {
 public:
  using Clock = std::function<Tick()>;

  TaskManager(AndOrGraph graph, Clock clock);

  /// Issues suggestion #1, or returns nullopt when the graph is already solved.
  std::optional<Suggestion> start();
  AckResult on_ack(const Ack& ack);
  /// Protective stop while a robot action is executing; handled as a failure
  /// of that action.
  AckResult on_intervention(const StopEvent& stop);

  const TimingRecord& timing_report() const { return timing_; }
  Phase phase() const { return phase_; }
  const AndOrGraph& graph() const { return graph_; }
  const CooperationPath& current_path() const { return path_; }
  const std::optional<Suggestion>& pending() const { return pending_; }
  const std::string& failure_reason() const { return failure_reason_; }
  std::span<const std::string> event_log() const { return log_; }
  /// Arcs in the order they were completed.
  std::span<const ArcId> completed_arcs() const { return completed_; }

 private:
  AckResult handle_success(const Ack& ack);
  AckResult handle_robot_failure(Tick at, const std::string& note);
  ArcId resolve_deviation(const Ack& ack) const;
  void carry_over_prefix(ArcId abandoned);
  void reselect(std::optional<ArcId> through);
  AckResult issue_next(Tick ack_time, std::string note);
  AckResult fail(Tick at, std::string_view reason, std::string note);
  void log_suggestion(const Suggestion& s);

  AndOrGraph graph_;
  Clock clock_;
  CooperationPath path_;
  std::optional<Suggestion> pending_;
  Phase phase_ = Phase::Running;
  TimingRecord timing_;
  std::uint64_t next_seq_ = 1;
  std::string failure_reason_;
  std::vector<std::string> log_;
  std::vector<ArcId> completed_;
};

}  // namespace coplan

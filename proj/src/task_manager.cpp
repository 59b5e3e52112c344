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

#include "coplan/task_manager.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <sstream>

#include "coplan/error.hpp"

namespace coplan {

std::string_view to_string(Binding b) {
  switch (b) {
    case Binding::Imposed: return "imposed";
    case Binding::Suggested: return "suggested";
    case Binding::Coordinated: return "coordinated";
  }
  return "unknown";
}

std::string_view to_string(Outcome o) {
  return o == Outcome::Success ? "success" : "failure";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Running: return "running";
    case Phase::Intervention: return "intervention";
    case Phase::Done: return "done";
    case Phase::Failed: return "failed";
  }
  return "unknown";
}

Binding binding_for(AgentKind agent) {
  switch (agent) {
    case AgentKind::Robot: return Binding::Imposed;
    case AgentKind::Human: return Binding::Suggested;
    case AgentKind::Joint: return Binding::Coordinated;
  }
  return Binding::Suggested;
}

namespace {

class WallTimer {
 public:
  explicit WallTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~WallTimer() {
    sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TaskManager::TaskManager(AndOrGraph graph, Clock clock)
    : graph_(std::move(graph)), clock_(std::move(clock)) {
  if (!graph_.has_paths()) graph_.load_paths(enumerate_paths(graph_));
}

std::optional<Suggestion> TaskManager::start() {
  WallTimer timer(timing_.wall_planner_seconds);
  if (graph_.solved()) {
    phase_ = Phase::Done;
    log_.push_back("done t=" + format_seconds(clock_()));
    return std::nullopt;
  }
  try {
    path_ = graph_.optimal_path();
  } catch (const Error&) {
    phase_ = Phase::Failed;
    failure_reason_ = kReasonGraphInfeasible;
    throw;
  }
  auto result = issue_next(-1, "start");
  if (result.kind == AckKind::Failed) {
    throw Error(ErrorCode::NoViablePath, "no feasible first action");
  }
  return result.next;
}

AckResult TaskManager::on_ack(const Ack& ack) {
  WallTimer timer(timing_.wall_planner_seconds);
  if (phase_ == Phase::Done || phase_ == Phase::Failed) {
    throw Error(ErrorCode::ProtocolViolation, "cooperation already finished");
  }
  if (!pending_) throw Error(ErrorCode::ProtocolViolation, "no suggestion pending");
  if (ack.seq != pending_->seq) {
    throw Error(ErrorCode::StaleSeq, "ack for #" + std::to_string(ack.seq) + " but #" +
                                         std::to_string(pending_->seq) + " is pending");
  }

  if (ack.outcome == Outcome::Failure) {
    if (ack.action != pending_->action.name) {
      throw Error(ErrorCode::ProtocolViolation,
                  "failure reported for '" + ack.action + "' which was not suggested");
    }
    log_.push_back("ack seq=" + std::to_string(ack.seq) + " t=" + format_seconds(ack.received_at) +
                   " arc=" + graph_.arc(pending_->arc).name + " action=" + ack.action +
                   " outcome=failure by=" + std::string(to_string(ack.performed_by)));
    if (pending_->agent == AgentKind::Robot) {
      return handle_robot_failure(ack.received_at, "robot action '" + ack.action + "' failed");
    }
    return fail(ack.received_at, kReasonHumanFailure, "action '" + ack.action + "' failed");
  }
  return handle_success(ack);
}

AckResult TaskManager::on_intervention(const StopEvent& stop) {
  if (phase_ != Phase::Running || !pending_ || pending_->agent != AgentKind::Robot) {
    throw Error(ErrorCode::NoRobotActionInFlight, "protective stop without a robot action in flight");
  }
  WallTimer timer(timing_.wall_planner_seconds);
  log_.push_back("stop seq=" + std::to_string(pending_->seq) + " t=" + format_seconds(stop.at) +
                 " arc=" + graph_.arc(pending_->arc).name + " action=" + pending_->action.name);
  return handle_robot_failure(stop.at, "protective stop during '" + pending_->action.name + "'");
}

AckResult TaskManager::handle_success(const Ack& ack) {
  const bool compliant =
      ack.action == pending_->action.name && (!ack.arc || *ack.arc == pending_->arc);
  ArcId arc = pending_->arc;
  if (!compliant) {
    if (ack.performed_by == AgentKind::Robot) {
      throw Error(ErrorCode::ProtocolViolation, "robot reported an action it was not commanded");
    }
    arc = resolve_deviation(ack);
  }

  const auto progress = graph_.record_action_finished(arc, ack.action);
  log_.push_back("ack seq=" + std::to_string(ack.seq) + " t=" + format_seconds(ack.received_at) +
                 " arc=" + graph_.arc(arc).name + " action=" + ack.action + " outcome=success by=" +
                 std::string(to_string(ack.performed_by)) + (compliant ? "" : " deviation=1"));
  // The operator has answered the stop; normal turn-taking resumes.
  if (phase_ == Phase::Intervention) phase_ = Phase::Running;
  if (progress.done) {
    const ArcId done[] = {arc};
    graph_.update_status(done);
    completed_.push_back(arc);
  }

  try {
    if (!compliant) {
      reselect(arc);
    } else if (progress.done && !graph_.solved()) {
      reselect(std::nullopt);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoViablePath) throw;
    return fail(ack.received_at, kReasonGraphInfeasible, e.what());
  }
  return issue_next(ack.received_at, compliant ? "proactive" : "reactive");
}

ArcId TaskManager::resolve_deviation(const Ack& ack) const {
  std::optional<ArcId> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (ArcId a : graph_.feasible_sets().arcs) {
    if (ack.arc && *ack.arc != a) continue;
    const auto& h = graph_.arc(a);
    auto next = std::find_if(h.actions.begin(), h.actions.end(), [](const Action& x) { return !x.finished; });
    if (next == h.actions.end() || next->name != ack.action) continue;
    auto through = graph_.optimal_path_through(a);
    const double cost = through ? through->cost : std::numeric_limits<double>::infinity();
    if (!best || cost < best_cost - kCostTolerance ||
        (std::abs(cost - best_cost) <= kCostTolerance && h.name < graph_.arc(*best).name) ||
        (std::isinf(cost) && std::isinf(best_cost) && h.name < graph_.arc(*best).name)) {
      best = a;
      best_cost = cost;
    }
  }
  if (!best) {
    throw Error(ErrorCode::InfeasibleAction,
                "'" + ack.action + "' is not the next action of any feasible arc");
  }
  return *best;
}

void TaskManager::carry_over_prefix(ArcId abandoned) {
  const HyperArc& from = graph_.arc(abandoned);
  for (ArcId sib : graph_.node(from.parent).incoming) {
    const HyperArc& to = graph_.arc(sib);
    if (sib == abandoned || to.children != from.children || !to.feasible) continue;
    bool done = false;
    for (std::size_t k = 0; k < from.actions.size() && k < to.actions.size(); ++k) {
      const Action& a = from.actions[k];
      const Action& b = to.actions[k];
      if (!a.finished || a.name != b.name || a.agent != b.agent) break;
      if (b.finished) continue;
      done = graph_.record_action_finished(sib, b.name).done;
      log_.push_back("carry arc=" + to.name + " action=" + b.name);
    }
    if (done) {
      const ArcId arcs[] = {sib};
      graph_.update_status(arcs);
      completed_.push_back(sib);
    }
  }
}

AckResult TaskManager::handle_robot_failure(Tick at, const std::string& note) {
  const ArcId abandoned = pending_->arc;
  graph_.suppress_arc(abandoned);
  carry_over_prefix(abandoned);
  phase_ = Phase::Intervention;
  if (graph_.solved()) return issue_next(at, note);
  try {
    reselect(std::nullopt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoViablePath) throw;
    return fail(at, kReasonRobotFailure, note + "; no alternative path");
  }
  return issue_next(at, note);
}

void TaskManager::reselect(std::optional<ArcId> through) {
  if (through) {
    if (auto p = graph_.optimal_path_through(*through)) {
      path_ = std::move(*p);
      return;
    }
  }
  path_ = graph_.optimal_path();
}

AckResult TaskManager::issue_next(Tick ack_time, std::string note) {
  if (graph_.solved()) {
    phase_ = Phase::Done;
    pending_.reset();
    log_.push_back("done t=" + format_seconds(ack_time));
    return AckResult{AckKind::Done, std::nullopt, std::move(note)};
  }
  if (graph_.status().kind == StatusKind::Failed) {
    return fail(ack_time, kReasonGraphInfeasible, "no feasible nodes or arcs remain");
  }

  auto pick = [&]() -> std::optional<ArcId> {
    if (!graph_.is_viable(path_)) return std::nullopt;
    // Finish an arc that is already under way before opening another one.
    for (ArcId a : path_.arcs) {
      const auto& h = graph_.arc(a);
      if (h.feasible && h.actions.front().finished) return a;
    }
    for (ArcId a : path_.arcs) {
      const auto& h = graph_.arc(a);
      if (!h.done) return h.feasible ? std::optional<ArcId>(a) : std::nullopt;
    }
    return std::nullopt;
  };

  auto arc = pick();
  if (!arc) {
    try {
      reselect(std::nullopt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoViablePath) throw;
      return fail(ack_time, kReasonGraphInfeasible, e.what());
    }
    arc = pick();
    if (!arc) return fail(ack_time, kReasonGraphInfeasible, "optimal path has no feasible arc");
  }

  const auto& h = graph_.arc(*arc);
  const Action& action = *std::find_if(h.actions.begin(), h.actions.end(),
                                       [](const Action& x) { return !x.finished; });
  Suggestion s;
  s.seq = next_seq_++;
  s.arc = *arc;
  s.action = action;
  s.agent = action.agent;
  s.binding = binding_for(action.agent);
  s.issued_at = clock_();
  if (ack_time >= 0) {
    timing_.gaps.push_back(TimingGap{ack_time, s.issued_at});
    timing_.total += s.issued_at - ack_time;
  }
  pending_ = s;
  log_suggestion(s);
  return AckResult{AckKind::Next, s, std::move(note)};
}

AckResult TaskManager::fail(Tick at, std::string_view reason, std::string note) {
  phase_ = Phase::Failed;
  pending_.reset();
  failure_reason_ = std::string(reason);
  log_.push_back("failed t=" + format_seconds(at) + " reason=" + failure_reason_);
  return AckResult{AckKind::Failed, std::nullopt, std::move(note)};
}

void TaskManager::log_suggestion(const Suggestion& s) {
  log_.push_back("suggest seq=" + std::to_string(s.seq) + " t=" + format_seconds(s.issued_at) +
                 " arc=" + graph_.arc(s.arc).name + " action=" + s.action.name +
                 " agent=" + std::string(to_string(s.agent)) +
                 " binding=" + std::string(to_string(s.binding)));
}

}  // namespace coplan

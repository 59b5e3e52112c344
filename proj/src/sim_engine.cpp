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

#include "coplan/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

#include "coplan/error.hpp"
#include "coplan/task_manager.hpp"

namespace coplan {

namespace {

// Discrete-event queue over integer virtual time. Events at equal times run
// in scheduling order.
class EventQueue {
 public:
  using Token = std::uint64_t;

  Tick now() const { return now_; }

  Token schedule(Tick at, std::function<void()> fn) {
    const Token token = next_++;
    heap_.push(Entry{at, token, std::move(fn)});
    return token;
  }

  void run() {
    while (!heap_.empty() && !stopped_) {
      Entry e = heap_.top();
      heap_.pop();
      now_ = e.at;
      e.fn();
    }
  }

  void stop() { stopped_ = true; }

 private:
  struct Entry {
    Tick at;
    Token token;
    std::function<void()> fn;
    bool operator>(const Entry& o) const { return at != o.at ? at > o.at : token > o.token; }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  Tick now_ = 0;
  Token next_ = 0;
  bool stopped_ = false;
};

bool in_list(const std::vector<std::string>& list, const std::string& name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

// One trial: owns the manager, the agents' random streams and the queue.
class TrialRun {
 public:
  TrialRun(const SimConfig& config, const AgentProfile& agents, const AndOrGraph& base,
           std::uint64_t seed)
      : config_(config),
        agents_(agents),
        human_durations_(derive_seed(seed, 0)),
        human_decisions_(derive_seed(seed, 1)),
        robot_rng_(derive_seed(seed, 2)),
        perception_rng_(derive_seed(seed, 3)),
        latency_(to_ticks(config.manager_latency_s)),
        timeout_(to_ticks(config.timeout_s)),
        manager_(base, [this] { return issue_at_; }) {}

  TrialResult run() {
    TrialResult r;
    std::optional<Suggestion> first;
    try {
      first = manager_.start();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoViablePath) throw;
      finish_failed(std::string(kReasonGraphInfeasible));
    }
    if (first) {
      initial_path_ = manager_.current_path().arcs;
      started_at_ = first->issued_at;
      queue_.schedule(first->issued_at, [this, s = *first] { dispatch(s); });
      queue_.run();
    } else if (!failed_) {
      finished_ = true;
    }

    r.status = failed_ ? TrialStatus::Failed : TrialStatus::Success;
    r.failure_reason = failure_reason_;
    r.metrics.t_m = manager_.timing_report().total;
    r.metrics.t_h = t_h_;
    r.metrics.t_r = t_r_;
    r.metrics.t_c = ended_at_ - started_at_;
    r.started_at = started_at_;
    r.ended_at = ended_at_;
    r.event_log.assign(manager_.event_log().begin(), manager_.event_log().end());
    r.event_log.insert(r.event_log.end(), engine_log_.begin(), engine_log_.end());
    for (ArcId a : manager_.completed_arcs()) {
      r.path_choice.push_back(manager_.graph().arc(a).name);
      if (std::find(initial_path_.begin(), initial_path_.end(), a) == initial_path_.end()) {
        ++r.hw_count;
      }
    }
    r.interventions = interventions_;
    r.wall_planner_seconds = manager_.timing_report().wall_planner_seconds;
    return r;
  }

 private:
  StageContext stage() const {
    return StageContext{static_cast<int>(manager_.completed_arcs().size()) + 1};
  }

  void dispatch(const Suggestion& s) {
    if (s.agent == AgentKind::Robot) {
      dispatch_robot(s);
    } else {
      dispatch_human(s);
    }
  }

  void dispatch_robot(const Suggestion& s) {
    const Tick recv = queue_.now();
    const RobotOutcome out = robot_execute(agents_.robot, s.action, robot_rng_);
    const Tick duration = to_ticks(out.duration);
    const auto stop = human_stop_offset(agents_.human, s, out.duration, stage(), human_decisions_);
    if (stop && to_ticks(*stop) < duration) {
      queue_.schedule(recv + to_ticks(*stop), [this, recv] {
        t_r_ += queue_.now() - recv;
        ++interventions_;
        issue_at_ = queue_.now() + latency_;
        handle(manager_.on_intervention(StopEvent{queue_.now()}));
      });
      return;
    }
    queue_.schedule(recv + duration, [this, s, recv, outcome = out.outcome] {
      t_r_ += queue_.now() - recv;
      Ack ack{s.seq, s.arc, s.action.name, outcome, AgentKind::Robot, queue_.now()};
      issue_at_ = queue_.now() + latency_;
      handle(manager_.on_ack(ack));
    });
  }

  void dispatch_human(const Suggestion& s) {
    const Tick recv = queue_.now();
    std::vector<std::string> alternatives;
    for (ArcId a : manager_.graph().feasible_sets().arcs) {
      for (const auto& act : manager_.graph().arc(a).actions) {
        if (!act.finished) {
          alternatives.push_back(act.name);
          break;
        }
      }
    }
    const HumanMove move = human_decide(agents_.human, s, alternatives, stage(), human_durations_);
    Tick duration = to_ticks(move.duration);
    if (move.responds && in_list(agents_.perception.actions, move.action)) {
      duration += to_ticks(agents_.perception.latency.sample(perception_rng_));
    }
    if (!move.responds || duration > timeout_) {
      queue_.schedule(recv + timeout_, [this, s] {
        engine_log_.push_back("timeout seq=" + std::to_string(s.seq) +
                              " t=" + format_seconds(queue_.now()) + " action=" + s.action.name);
        finish_failed(std::string(kReasonTimeout));
      });
      return;
    }
    queue_.schedule(recv + duration, [this, s, recv, move] {
      t_h_ += queue_.now() - recv;
      Ack ack;
      ack.seq = s.seq;
      if (!move.is_deviation) ack.arc = s.arc;
      ack.action = move.action;
      ack.outcome = Outcome::Success;
      ack.performed_by = s.agent == AgentKind::Joint ? AgentKind::Joint : AgentKind::Human;
      ack.received_at = queue_.now();
      issue_at_ = queue_.now() + latency_;
      handle(manager_.on_ack(ack));
    });
  }

  void handle(const AckResult& res) {
    switch (res.kind) {
      case AckKind::Next:
        queue_.schedule(res.next->issued_at, [this, s = *res.next] { dispatch(s); });
        break;
      case AckKind::Done:
        finished_ = true;
        ended_at_ = queue_.now();
        queue_.stop();
        break;
      case AckKind::Failed:
        finish_failed(manager_.failure_reason());
        break;
    }
  }

  void finish_failed(std::string reason) {
    failed_ = true;
    failure_reason_ = std::move(reason);
    ended_at_ = queue_.now();
    queue_.stop();
  }

  const SimConfig& config_;
  const AgentProfile& agents_;
  Rng human_durations_;
  Rng human_decisions_;
  Rng robot_rng_;
  Rng perception_rng_;
  Tick latency_;
  Tick timeout_;
  Tick issue_at_ = 0;
  TaskManager manager_;
  EventQueue queue_;
  std::vector<ArcId> initial_path_;
  std::vector<std::string> engine_log_;
  Tick t_h_ = 0;
  Tick t_r_ = 0;
  Tick started_at_ = 0;
  Tick ended_at_ = 0;
  int interventions_ = 0;
  bool finished_ = false;
  bool failed_ = false;
  std::string failure_reason_;
};

}  // namespace

void validate(const SimConfig& config) {
  if (!(config.timeout_s > 0.0)) throw Error(ErrorCode::ConfigError, "timeout must be positive");
  if (config.trials < 1) throw Error(ErrorCode::ConfigError, "trials must be at least 1");
  if (!(config.manager_latency_s >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "manager latency must be non-negative");
  }
  auto check = [](const AgentProfile& p) {
    validate(p.human);
    validate(p.robot);
    validate(p.perception);
  };
  check(config.agents);
  for (const auto& p : config.cohort) check(p);
}

MetricStats summarize(std::span<const double> values) {
  MetricStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

MetricStats summarize_ticks(std::span<const Tick> values) {
  MetricStats s;
  if (values.empty()) return s;
  const auto n = static_cast<__int128>(values.size());
  __int128 sum = 0, sq = 0;
  for (Tick v : values) {
    sum += v;
    sq += static_cast<__int128>(v) * v;
  }
  s.mean = static_cast<double>(sum) / static_cast<double>(n) / kTicksPerSecond;
  if (n > 1) {
    // n * sum(x^2) - sum(x)^2 = n * (n - 1) * variance, exactly.
    const __int128 scaled = n * sq - sum * sum;
    s.stddev = std::sqrt(static_cast<double>(scaled) / static_cast<double>(n * (n - 1))) / kTicksPerSecond;
  }
  return s;
}

Simulator::Simulator(SimConfig config) : config_(std::move(config)), base_([&] {
  validate(config_);
  try {
    return load_graph(config_.model);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("model: ") + e.what());
  }
}()) {}

TrialResult Simulator::run_trial(int index) const {
  return run_trial_with_seed(index, derive_seed(config_.seed, static_cast<std::uint64_t>(index)));
}

TrialResult Simulator::run_trial_with_seed(int index, std::uint64_t seed) const {
  const AgentProfile& agents =
      config_.cohort.empty() ? config_.agents
                             : config_.cohort[static_cast<std::size_t>(index) % config_.cohort.size()];
  TrialRun run(config_, agents, base_, seed);
  TrialResult r = run.run();
  r.trial = index;
  r.seed = seed;
  return r;
}

BatchSummary Simulator::run_batch() const {
  const int n = config_.trials;
  std::vector<TrialResult> results(static_cast<std::size_t>(n));
  unsigned workers = config_.threads ? config_.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(n));

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = run_trial(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  // Deterministic fold in trial order.
  BatchSummary s;
  s.trials = n;
  std::vector<Tick> tm, th, tr, tc;
  std::vector<double> pm, ph, pr;
  double hw = 0.0, stops = 0.0;
  for (const auto& r : results) {
    hw += r.hw_count;
    stops += r.interventions;
    if (r.status == TrialStatus::Failed) {
      ++s.failure_counts[r.failure_reason];
      continue;
    }
    ++s.successes;
    const auto& m = r.metrics;
    tm.push_back(m.t_m);
    th.push_back(m.t_h);
    tr.push_back(m.t_r);
    tc.push_back(m.t_c);
    if (m.t_c > 0) {
      const double c = static_cast<double>(m.t_c);
      pm.push_back(100.0 * static_cast<double>(m.t_m) / c);
      ph.push_back(100.0 * static_cast<double>(m.t_h) / c);
      pr.push_back(100.0 * static_cast<double>(m.t_r) / c);
    }
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(n);
  s.t_m = summarize_ticks(tm);
  s.t_h = summarize_ticks(th);
  s.t_r = summarize_ticks(tr);
  s.t_c = summarize_ticks(tc);
  s.pct_m = summarize(pm);
  s.pct_h = summarize(ph);
  s.pct_r = summarize(pr);
  s.mean_hw_count = hw / n;
  s.mean_interventions = stops / n;
  s.results = std::move(results);
  return s;
}

TrialResult run_trial(const SimConfig& config, std::uint64_t seed) {
  return Simulator(config).run_trial_with_seed(0, seed);
}

BatchSummary run_batch(const SimConfig& config) { return Simulator(config).run_batch(); }

namespace {

std::map<std::string, std::string> fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string tok;
  in >> tok;
  out["kind"] = tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

Tick parse_ticks(const std::string& text) {
  // Log times are rendered with exactly six decimals.
  const bool negative = !text.empty() && text[0] == '-';
  const std::string body = negative ? text.substr(1) : text;
  const auto dot = body.find('.');
  Tick whole = std::stoll(body.substr(0, dot));
  Tick frac = dot == std::string::npos ? 0 : std::stoll(body.substr(dot + 1));
  Tick v = whole * kTicksPerSecond + frac;
  return negative ? -v : v;
}

}  // namespace

TrialMetrics replay_metrics(const AndOrGraph& base, std::span<const std::string> event_log) {
  struct Logged {
    std::map<std::string, std::string> f;
  };
  std::vector<Logged> events;
  for (const auto& line : event_log) events.push_back({fields(line)});

  Tick issue_at = 0;
  TaskManager manager(base, [&] { return issue_at; });
  TrialMetrics m;
  std::optional<Tick> first;
  Tick last = 0;
  std::optional<Suggestion> pending;

  auto next_suggest_time = [&](std::size_t from) -> Tick {
    for (std::size_t j = from; j < events.size(); ++j) {
      if (events[j].f["kind"] == "suggest") return parse_ticks(events[j].f["t"]);
    }
    return 0;
  };
  auto expect = [&](const std::optional<Suggestion>& s, std::map<std::string, std::string>& f) {
    if (!s || s->seq != std::stoull(f["seq"]) || s->issued_at != parse_ticks(f["t"]) ||
        manager.graph().arc(s->arc).name != f["arc"] || s->action.name != f["action"]) {
      throw Error(ErrorCode::ProtocolViolation, "replay diverged at suggestion #" + f["seq"]);
    }
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& f = events[i].f;
    const std::string& kind = f["kind"];
    if (kind == "suggest") {
      const Tick t = parse_ticks(f["t"]);
      if (!first) {
        issue_at = t;
        pending = manager.start();
        first = t;
      }
      expect(pending, f);
    } else if (kind == "ack" || kind == "stop") {
      const Tick t = parse_ticks(f["t"]);
      const Tick dt = t - pending->issued_at;
      if (pending->agent == AgentKind::Robot) {
        m.t_r += dt;
      } else {
        m.t_h += dt;
      }
      last = t;
      issue_at = next_suggest_time(i + 1);
      AckResult res;
      if (kind == "stop") {
        res = manager.on_intervention(StopEvent{t});
      } else {
        Ack ack;
        ack.seq = std::stoull(f["seq"]);
        ack.action = f["action"];
        ack.outcome = f["outcome"] == "success" ? Outcome::Success : Outcome::Failure;
        auto by = parse_agent(f["by"]);
        ack.performed_by = by ? *by : AgentKind::Human;
        if (!f.contains("deviation")) ack.arc = manager.graph().arc_id(f["arc"]);
        ack.received_at = t;
        res = manager.on_ack(ack);
      }
      pending = res.next;
    } else if (kind == "timeout" || kind == "failed" || kind == "done") {
      last = parse_ticks(f["t"]);
    }
  }
  m.t_m = manager.timing_report().total;
  m.t_c = first ? last - *first : 0;
  return m;
}

}  // namespace coplan

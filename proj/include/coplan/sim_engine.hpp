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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coplan/andor_graph.hpp"
#include "coplan/cooperation_model.hpp"
#include "coplan/sim_agents.hpp"
#include "coplan/virtual_time.hpp"

namespace coplan {

struct AgentProfile {
  HumanPolicy human;
  RobotModel robot;
  PerceptionModel perception;
};

/// Durations for the palletization vocabulary used when nothing else is
/// configured.
AgentProfile default_agent_profile();

struct SimConfig {
  GraphSpec model;
  AgentProfile agents;
  /// When non-empty, trial i runs with cohort[i % cohort.size()] instead of
  /// `agents` (e.g. different operators across a batch).
  std::vector<AgentProfile> cohort;
  double manager_latency_s = 0.0;
  double timeout_s = 120.0;
  int trials = 1;
  std::uint64_t seed = 0;
  /// Worker threads for run_batch; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

void validate(const SimConfig& config);

inline constexpr std::string_view kScenarioVersion = "coplan-scenario/1";
inline constexpr std::string_view kReasonTimeout = "timeout";

/// Parses a "coplan-scenario/1" document. Relative model paths resolve
/// against `base_dir`. Throws ConfigError on any schema problem.
SimConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
SimConfig load_scenario_file(const std::string& path);
/// Agent sections ("human", "robot", "perception") layered over `base`.
AgentProfile parse_agent_profile(const nlohmann::json& doc, const AgentProfile& base);
std::vector<ScriptStep> parse_script(const nlohmann::json& doc);

enum class TrialStatus { Success, Failed };

struct TrialMetrics {
  Tick t_m = 0;
  Tick t_h = 0;
  Tick t_r = 0;
  Tick t_c = 0;

  bool operator==(const TrialMetrics&) const = default;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::Success;
  std::string failure_reason;
  TrialMetrics metrics;
  /// Virtual time of the first suggestion and of the end of the run.
  Tick started_at = 0;
  Tick ended_at = 0;
  std::vector<std::string> event_log;
  /// Names of completed arcs in completion order.
  std::vector<std::string> path_choice;
  /// Completed arcs that were not on the initially optimal path (the hw
  /// alternatives in the palletization model).
  int hw_count = 0;
  int interventions = 0;
  double wall_planner_seconds = 0.0;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
};

struct BatchSummary {
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  // Over successful trials only.
  MetricStats t_m, t_h, t_r, t_c;
  // Per-trial shares of T_c in percent, averaged over successful trials.
  MetricStats pct_m, pct_h, pct_r;
  std::map<std::string, int> failure_counts;
  double mean_hw_count = 0.0;  // over all trials
  double mean_interventions = 0.0;
  std::vector<TrialResult> results;
};

MetricStats summarize(std::span<const double> values);
/// Same statistics over virtual-time values (reported in seconds). Moments are
/// accumulated in integers, so identical inputs give a spread of exactly 0.
MetricStats summarize_ticks(std::span<const Tick> values);

/// Runs trials against one offline-initialised graph.
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  const SimConfig& config() const { return config_; }
  const AndOrGraph& base_graph() const { return base_; }

  /// Trial `index` with seed derive_seed(config.seed, index).
  TrialResult run_trial(int index) const;
  TrialResult run_trial_with_seed(int index, std::uint64_t seed) const;
  BatchSummary run_batch() const;

 private:
  SimConfig config_;
  AndOrGraph base_;
};

TrialResult run_trial(const SimConfig& config, std::uint64_t seed);
BatchSummary run_batch(const SimConfig& config);

/// Recomputes the timing metrics from an event log, re-driving a fresh task
/// manager and checking that it proposes the logged suggestions.
TrialMetrics replay_metrics(const AndOrGraph& base, std::span<const std::string> event_log);

enum class ExportFormat { Csv, Jsonl };

/// Columns: trial, status, T_m, T_h, T_r, T_c, hw_count, failure_reason.
/// Failed rows leave the time fields empty.
std::string format_results(std::span<const TrialResult> results, ExportFormat format);
void export_results(std::span<const TrialResult> results, ExportFormat format,
                    const std::string& path);

}  // namespace coplan

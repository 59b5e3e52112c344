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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coplan/error.hpp"
#include "coplan/sim_engine.hpp"

namespace coplan {
namespace {

const std::string kData = COPLAN_DATA_DIR;

SimConfig palletize(int parts, int trials = 1) {
  SimConfig c;
  c.model = generate_palletization(parts);
  c.agents = default_agent_profile();
  c.trials = trials;
  c.seed = 5;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(RunTrial, CompliantFifteenParts) {
  auto r = run_trial(palletize(15), 1);
  ASSERT_EQ(r.status, TrialStatus::Success);
  EXPECT_EQ(r.metrics.t_m, 0);
  EXPECT_EQ(r.metrics.t_c, r.metrics.t_h + r.metrics.t_r);
  EXPECT_EQ(r.metrics.t_r, to_ticks(15 * 80.0));
  EXPECT_EQ(r.metrics.t_h, to_ticks(15 * 5.0));
  EXPECT_EQ(r.path_choice.size(), 15u);
  for (const auto& a : r.path_choice) EXPECT_TRUE(a.starts_with("h_"));
  EXPECT_EQ(r.hw_count, 0);
}

TEST(RunTrial, UnresponsiveHumanTimesOut) {
  auto c = palletize(3);
  c.agents.human.kind = HumanPolicyKind::Unresponsive;
  c.manager_latency_s = 0.25;
  auto r = run_trial(c, 1);
  EXPECT_EQ(r.status, TrialStatus::Failed);
  EXPECT_EQ(r.failure_reason, kReasonTimeout);
  // Latency only separates later suggestions; the first goes out at t = 0.
  EXPECT_EQ(r.started_at, 0);
  EXPECT_EQ(r.ended_at, r.started_at + to_ticks(120.0));
  EXPECT_EQ(r.event_log.back(), "timeout seq=1 t=120.000000 action=inspect");
}

TEST(RunTrial, SlowHumanTimesOutLater) {
  auto c = palletize(3);
  c.agents.human.durations["palletize"] = DurationSpec::constant(500);
  c.agents.human.kind = HumanPolicyKind::Scripted;
  c.agents.human.script = {{2, ScriptStep::Kind::Intervene, "", ""}};
  auto r = run_trial(c, 1);
  EXPECT_EQ(r.status, TrialStatus::Failed);
  EXPECT_EQ(r.failure_reason, kReasonTimeout);
  EXPECT_NE(r.event_log.back().find("action=palletize"), std::string::npos);
}

TEST(RunTrial, GraspFailureWithoutAlternativeFails) {
  auto c = palletize(3);
  std::erase_if(c.model.arcs, [](const ArcSpec& a) { return a.name.starts_with("hw_"); });
  c.agents.robot.grasp_failure_probability = 1.0;
  auto r = run_trial(c, 1);
  EXPECT_EQ(r.status, TrialStatus::Failed);
  EXPECT_EQ(r.failure_reason, kReasonRobotFailure);
}

TEST(RunTrial, GraspFailureRetriesOnHwArc) {
  auto c = palletize(4);
  c.agents.robot.grasp_failure_probability = 1.0;
  auto r = run_trial(c, 1);
  // The hw alternative needs a grasp too, so a gripper that never holds
  // fails the run after one switch.
  EXPECT_EQ(r.status, TrialStatus::Failed);
  EXPECT_EQ(r.failure_reason, kReasonRobotFailure);
  EXPECT_NE(std::find_if(r.event_log.begin(), r.event_log.end(),
                         [](const std::string& l) {
                           return l.starts_with("suggest") && l.find("arc=hw_1 action=grasp") != std::string::npos;
                         }),
            r.event_log.end());
}

TEST(RunTrial, OccasionalGraspFailureRecovers) {
  auto c = palletize(6, 40);
  c.agents.robot.grasp_failure_probability = 0.2;
  auto s = run_batch(c);
  int recovered = 0;
  for (const auto& r : s.results) {
    if (r.status == TrialStatus::Success && r.hw_count > 0) {
      ++recovered;
      EXPECT_EQ(r.metrics.t_c, r.metrics.t_m + r.metrics.t_h + r.metrics.t_r);
    }
  }
  EXPECT_GT(recovered, 0);
}

TEST(RunTrial, ScriptedInterventionUsesHw) {
  for (int i = 1; i <= 5; ++i) {
    auto c = palletize(5);
    c.agents.human.kind = HumanPolicyKind::Scripted;
    c.agents.human.script = {{i, ScriptStep::Kind::Intervene, "", ""}};
    auto r = run_trial(c, 1);
    ASSERT_EQ(r.status, TrialStatus::Success);
    EXPECT_EQ(r.hw_count, 1);
    EXPECT_EQ(r.interventions, 1);
    EXPECT_EQ(r.path_choice[static_cast<std::size_t>(i - 1)], "hw_" + std::to_string(i));
    // Half of the 30 s transport ran before the stop.
    EXPECT_EQ(r.metrics.t_r, to_ticks(5 * 80.0 - 30 - 2 + 15));
  }
}

TEST(RunTrial, PerceptionLatencyCountsAsHumanTime) {
  auto c = palletize(2);
  c.agents.perception.latency = DurationSpec::constant(0.5);
  auto r = run_trial(c, 1);
  EXPECT_EQ(r.metrics.t_h, to_ticks(2 * 5.5));
}

TEST(RunTrial, ProbabilityZeroMatchesCompliant) {
  auto compliant = palletize(6);
  compliant.agents.human.durations["inspect"] = DurationSpec::uniform(2, 4);
  compliant.agents.robot.durations["approach-goal"] = DurationSpec::uniform(25, 35);
  auto intervene = compliant;
  intervene.agents.human.kind = HumanPolicyKind::Interventionist;
  intervene.agents.human.intervention_probability = 0.0;
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    EXPECT_EQ(run_trial(compliant, seed).event_log, run_trial(intervene, seed).event_log);
  }
}

TEST(RunTrial, SameSeedSameLog) {
  auto c = palletize(5);
  c.agents.human.kind = HumanPolicyKind::Interventionist;
  c.agents.human.intervention_probability = 0.3;
  c.agents.human.durations["inspect"] = DurationSpec::uniform(2, 4);
  c.manager_latency_s = 0.01;
  const auto a = run_trial(c, 17);
  const auto b = run_trial(c, 17);
  EXPECT_EQ(a.event_log, b.event_log);
  EXPECT_EQ(a.metrics, b.metrics);
}

TEST(RunTrial, ReplayReproducesMetrics) {
  auto c = palletize(6);
  c.agents.human.kind = HumanPolicyKind::Interventionist;
  c.agents.human.intervention_probability = 0.4;
  c.agents.human.durations["deliver-part"] = DurationSpec::uniform(1, 3);
  c.agents.robot.grasp_failure_probability = 0.1;
  c.manager_latency_s = 0.02;
  Simulator sim(c);
  for (int i = 0; i < 20; ++i) {
    const auto r = sim.run_trial(i);
    if (r.status != TrialStatus::Success) continue;
    EXPECT_EQ(replay_metrics(sim.base_graph(), r.event_log), r.metrics) << "trial " << i;
  }
}

TEST(RunBatch, ConstantInputsHaveZeroSpread) {
  auto c = palletize(4, 10);
  c.manager_latency_s = 0.05;
  auto s = run_batch(c);
  EXPECT_EQ(s.successes, 10);
  EXPECT_EQ(s.success_rate, 1.0);
  for (const auto& m : {s.t_m, s.t_h, s.t_r, s.t_c}) EXPECT_EQ(m.stddev, 0.0);
}

TEST(RunBatch, DeterministicAcrossThreadCounts) {
  auto c = palletize(5, 12);
  c.agents.human.kind = HumanPolicyKind::Interventionist;
  c.agents.human.intervention_probability = 0.3;
  c.agents.robot.durations["grasp"] = DurationSpec::uniform(2, 4);
  c.threads = 1;
  const auto a = run_batch(c);
  c.threads = 4;
  const auto b = run_batch(c);
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].event_log, b.results[i].event_log);
  }
  EXPECT_EQ(a.t_c.mean, b.t_c.mean);
  EXPECT_EQ(format_results(a.results, ExportFormat::Csv), format_results(b.results, ExportFormat::Csv));
}

TEST(RunBatch, InterventionRateMatchesBinomial) {
  auto c = palletize(15, 100);
  c.agents.human.kind = HumanPolicyKind::Interventionist;
  c.agents.human.intervention_probability = 0.2;
  auto s = run_batch(c);
  EXPECT_EQ(s.successes, 100);
  // 1500 independent parts, each stopped with p = 0.2.
  const double sigma_mean = std::sqrt(15 * 0.2 * 0.8 / 100.0);
  EXPECT_LE(std::abs(s.mean_hw_count - 3.0), 3 * sigma_mean) << s.mean_hw_count;
  for (const auto& r : s.results) EXPECT_EQ(r.hw_count, r.interventions);
}

TEST(RunBatch, FailuresAreCountedAndExcludedFromTimes) {
  auto c = palletize(3, 6);
  c.cohort = {default_agent_profile(), default_agent_profile()};
  c.cohort[1].human.kind = HumanPolicyKind::Unresponsive;
  auto s = run_batch(c);
  EXPECT_EQ(s.successes, 3);
  EXPECT_EQ(s.success_rate, 0.5);
  EXPECT_EQ(s.failure_counts.at(std::string(kReasonTimeout)), 3);
  EXPECT_EQ(s.t_c.stddev, 0.0);
  EXPECT_EQ(s.t_c.mean, 3 * 85.0);
}

TEST(Summarize, SampleStandardDeviation) {
  const double v[] = {2, 4, 4, 4, 5, 5, 7, 9};
  auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(32.0 / 7.0));
  const double one[] = {3};
  EXPECT_EQ(summarize(one).stddev, 0.0);
  const Tick ticks[] = {2'000'000, 4'000'000, 4'000'000, 4'000'000, 5'000'000, 5'000'000, 7'000'000, 9'000'000};
  auto t = summarize_ticks(ticks);
  EXPECT_DOUBLE_EQ(t.mean, 5.0);
  EXPECT_DOUBLE_EQ(t.stddev, std::sqrt(32.0 / 7.0));
  const Tick same[] = {2'489'968, 2'489'968, 2'489'968};
  EXPECT_EQ(summarize_ticks(same).stddev, 0.0);
}

TEST(Config, Validation) {
  auto c = palletize(2);
  c.timeout_s = 0;
  EXPECT_THROW(Simulator{c}, Error);
  c = palletize(2);
  c.trials = 0;
  EXPECT_THROW(Simulator{c}, Error);
  c = palletize(2);
  c.model.arcs[0].parent = "nowhere";
  try {
    Simulator sim(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Scenario, Table2FixtureLoads) {
  auto c = load_scenario_file(kData + "/scenarios/batch-timing.json");
  EXPECT_EQ(c.trials, 10);
  EXPECT_EQ(c.cohort.size(), 2u);
  EXPECT_EQ(c.model, generate_palletization(15));
  EXPECT_EQ(c.cohort[0].human.durations.at("inspect"), DurationSpec::constant(3.1));
  EXPECT_EQ(c.cohort[1].robot.durations.at("approach-goal"), DurationSpec::constant(12.0));
  // Inherited from the defaults.
  EXPECT_EQ(c.cohort[0].human.durations.at("palletize"), DurationSpec::constant(5.0));
}

TEST(Scenario, ModelReferences) {
  nlohmann::json doc = {{"version", "coplan-scenario/1"}, {"model", {{"path", "models/fig4.json"}}}};
  auto c = parse_scenario(doc, kData);
  EXPECT_EQ(c.model.name, "fig4");
  doc["model"] = {{"inline", nlohmann::json::parse(serialize_model(generate_palletization(2)))}};
  EXPECT_EQ(serialize_model(parse_scenario(doc).model), serialize_model(generate_palletization(2)));
}

TEST(Scenario, Errors) {
  auto bad = [](nlohmann::json doc) {
    try {
      parse_scenario(doc, kData);
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigError;
    }
    return false;
  };
  const nlohmann::json model = {{"palletize", {{"parts", 2}}}};
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}}));
  EXPECT_TRUE(bad({{"version", "other"}, {"model", model}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", model}, {"extra", 1}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", model}, {"timeout", 0}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", {{"palletize", {{"parts", 0}}}}}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", {{"path", "missing.json"}}}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", model}, {"human", {{"policy", "lazy"}}}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", model},
                   {"human", {{"durations", {{"inspect", {1, 2, 3}}}}}}}));
  EXPECT_TRUE(bad({{"version", "coplan-scenario/1"}, {"model", model},
                   {"human", {{"policy", "intervene"}, {"intervention_probability", 2}}}}));
}

TEST(Export, CsvLayout) {
  auto c = palletize(2, 2);
  c.cohort = {default_agent_profile(), default_agent_profile()};
  c.cohort[1].human.kind = HumanPolicyKind::Unresponsive;
  auto s = run_batch(c);
  const std::string csv = format_results(s.results, ExportFormat::Csv);
  EXPECT_EQ(csv,
            "trial,status,T_m,T_h,T_r,T_c,hw_count,failure_reason\n"
            "0,success,0.000000,10.000000,160.000000,170.000000,0,\n"
            "1,failed,,,,,0,timeout\n");
  const std::string jsonl = format_results(s.results, ExportFormat::Jsonl);
  std::istringstream lines(jsonl);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("T_c"));
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Export, WritesFilesAndReportsErrors) {
  auto s = run_batch(palletize(1, 1));
  const auto path = std::filesystem::temp_directory_path() / "coplan_export_test.csv";
  export_results(s.results, ExportFormat::Csv, path.string());
  EXPECT_EQ(read_file(path.string()), format_results(s.results, ExportFormat::Csv));
  std::filesystem::remove(path);
  try {
    export_results(s.results, ExportFormat::Csv, "/nonexistent-dir/x.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  try {
    export_results({}, ExportFormat::Csv, path.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Export, Table2GoldenCsv) {
  auto s = run_batch(load_scenario_file(kData + "/scenarios/batch-timing.json"));
  EXPECT_EQ(format_results(s.results, ExportFormat::Csv), read_file(kData + "/golden/batch-timing.csv"));
}

}  // namespace
}  // namespace coplan

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

// coplan: command-line front end.
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 every simulated trial failed.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "coplan/error.hpp"
#include "coplan/sim_engine.hpp"

#ifdef COPLAN_WITH_SERVER
#include "coplan/session_server.hpp"
#endif

namespace {

using namespace coplan;

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

std::string join_arcs(const AndOrGraph& g, const CooperationPath& p) {
  std::string out;
  for (ArcId a : p.arcs) {
    if (!out.empty()) out += ',';
    out += g.arc(a).name;
  }
  return out;
}

std::string cost_text(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", c);
  return buf;
}

int cmd_enumerate(const std::string& model, bool count_only, std::size_t cap) {
  const auto g = load_graph(load_model_file(model), cap);
  const auto paths = g.paths();
  if (count_only) {
    std::cout << paths.size() << '\n';
    return 0;
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::cout << i + 1 << '\t' << cost_text(paths[i].cost) << '\t' << join_arcs(g, paths[i]) << '\n';
  }
  return 0;
}

int cmd_optimal(const std::string& model) {
  const auto g = load_graph(load_model_file(model));
  const auto p = g.optimal_path();
  std::cout << "cost " << cost_text(p.cost) << "\narcs " << join_arcs(g, p) << '\n';
  for (const auto& ref : p.action_sequence) {
    const auto& a = g.action(ref);
    std::cout << g.arc(ref.arc).name << '\t' << a.name << '\t' << to_string(a.agent) << '\n';
  }
  return 0;
}

// "compliant" | "unresponsive" | "intervene:P" | "script:FILE"
void apply_policy(const std::string& spec, SimConfig& c) {
  auto set_all = [&](auto&& fn) {
    fn(c.agents.human);
    for (auto& m : c.cohort) fn(m.human);
  };
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "compliant" && arg.empty()) {
    set_all([](HumanPolicy& h) { h.kind = HumanPolicyKind::Compliant; });
  } else if (kind == "unresponsive" && arg.empty()) {
    set_all([](HumanPolicy& h) { h.kind = HumanPolicyKind::Unresponsive; });
  } else if (kind == "intervene" && !arg.empty()) {
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "intervene:P needs a number, got '" + arg + "'");
    }
    set_all([p](HumanPolicy& h) {
      h.kind = HumanPolicyKind::Interventionist;
      h.intervention_probability = p;
    });
  } else if (kind == "script" && !arg.empty()) {
    std::ifstream in(arg);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open script '" + arg + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ConfigError, "script '" + arg + "': " + e.what());
    }
    auto steps = parse_script(doc);
    set_all([&](HumanPolicy& h) {
      h.kind = HumanPolicyKind::Scripted;
      h.script = steps;
    });
  } else {
    throw Error(ErrorCode::ConfigError,
                "policy must be compliant, unresponsive, intervene:P or script:FILE, got '" + spec + "'");
  }
}

struct SimulateArgs {
  std::string model, scenario, policy, out, format = "csv";
  int palletize = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double timeout = 0.0, latency = -1.0;
  unsigned threads = 0;
};

void print_stat(const char* name, const MetricStats& s, const char* unit) {
  std::printf("%-4s mean %12.6f  sd %12.6f %s\n", name, s.mean, s.stddev, unit);
}

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
  SimConfig c;
  if (!a.scenario.empty()) {
    c = load_scenario_file(a.scenario);
  } else {
    c.agents = default_agent_profile();
  }
  const int sources = !a.model.empty() + (a.palletize > 0);
  if (sources > 1) throw Error(ErrorCode::ConfigError, "give either --model or --palletize");
  if (!a.model.empty()) c.model = load_model_file(a.model);
  if (a.palletize > 0) c.model = generate_palletization(a.palletize);
  if (sources == 0 && a.scenario.empty()) {
    throw Error(ErrorCode::ConfigError, "one of --model, --palletize or --scenario is required");
  }
  if (sub.count("--policy")) apply_policy(a.policy, c);
  if (sub.count("--trials")) c.trials = a.trials;
  if (sub.count("--seed")) c.seed = a.seed;
  if (sub.count("--timeout")) c.timeout_s = a.timeout;
  if (sub.count("--manager-latency")) c.manager_latency_s = a.latency;
  if (sub.count("--threads")) c.threads = a.threads;
  validate(c);

  const auto s = run_batch(c);
  if (!a.out.empty()) {
    export_results(s.results, a.format == "jsonl" ? ExportFormat::Jsonl : ExportFormat::Csv, a.out);
  }
  std::printf("trials %d  successes %d  success_rate %.4f\n", s.trials, s.successes, s.success_rate);
  if (s.successes > 0) {
    print_stat("T_m", s.t_m, "s");
    print_stat("T_h", s.t_h, "s");
    print_stat("T_r", s.t_r, "s");
    print_stat("T_c", s.t_c, "s");
    print_stat("%m", s.pct_m, "%");
    print_stat("%h", s.pct_h, "%");
    print_stat("%r", s.pct_r, "%");
  }
  std::printf("hw_mean %.4f  interventions_mean %.4f\n", s.mean_hw_count, s.mean_interventions);
  for (const auto& [reason, n] : s.failure_counts) std::printf("failed %s %d\n", reason.c_str(), n);
  return s.successes == 0 ? kExitAllFailed : 0;
}

int cmd_generate(int parts, double w_h, double w_hw, const std::string& out) {
  const auto text = serialize_model(generate_palletization(parts, w_h, w_hw));
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + out + "'");
  return 0;
}

const char* env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperation planning on AND/OR graphs"};
  app.require_subcommand(1);

  auto* enumerate = app.add_subcommand("enumerate", "List every cooperation path, cheapest first");
  std::string enum_model;
  bool count_only = false;
  std::size_t cap = kDefaultPathCap;
  enumerate->add_option("--model", enum_model, "Model file")->required();
  enumerate->add_flag("--count", count_only, "Print only the number of paths");
  enumerate->add_option("--max-paths", cap, "Refuse models with more paths than this");

  auto* optimal = app.add_subcommand("optimal", "Print the optimal path and its action sequence");
  std::string opt_model;
  optimal->add_option("--model", opt_model, "Model file")->required();

  auto* simulate = app.add_subcommand("simulate", "Run simulated cooperation trials");
  SimulateArgs sim;
  simulate->add_option("--model", sim.model, "Model file");
  simulate->add_option("--palletize", sim.palletize, "Generate the palletization model with K parts")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--scenario", sim.scenario, "Scenario file; other flags override it");
  simulate->add_option("--policy", sim.policy, "compliant | unresponsive | intervene:P | script:FILE");
  simulate->add_option("--trials", sim.trials, "Number of trials")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--timeout", sim.timeout, "Human response timeout in seconds");
  simulate->add_option("--manager-latency", sim.latency, "Planner latency per suggestion in seconds");
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
  simulate->add_option("--out", sim.out, "Per-trial results file");
  simulate->add_option("--format", sim.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* generate = app.add_subcommand("generate", "Write the palletization model");
  int parts = 15;
  double w_h = 1.0, w_hw = 4.0;
  std::string gen_out;
  generate->add_option("--parts", parts, "Number of parts")->check(CLI::PositiveNumber);
  generate->add_option("--w-h", w_h, "Weight of the robot-only arcs");
  generate->add_option("--w-hw", w_hw, "Weight of the handover arcs");
  generate->add_option("--out", gen_out, "Output file (default: stdout)");

#ifdef COPLAN_WITH_SERVER
  auto* serve = app.add_subcommand("serve", "Run the live session service");
  int port = std::atoi(env_or("COPLAN_PORT", "8080"));
  std::string address = "127.0.0.1";
  std::string model_dir = env_or("COPLAN_MODEL_DIR", "data/models");
  std::string log_dir = env_or("COPLAN_LOG_DIR", "");
  double time_scale = 0.1, human_timeout = 120.0;
  serve->add_option("--port", port, "TCP port (env COPLAN_PORT)")->check(CLI::Range(0, 65535));
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--model-dir", model_dir, "Directory for model paths in create requests");
  serve->add_option("--log-dir", log_dir, "Journal directory (env COPLAN_LOG_DIR)");
  serve->add_option("--robot-time-scale", time_scale, "Wall seconds per simulated robot second");
  serve->add_option("--human-timeout", human_timeout, "Seconds a human turn may stay open");
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*enumerate) return cmd_enumerate(enum_model, count_only, cap);
    if (*optimal) return cmd_optimal(opt_model);
    if (*simulate) return cmd_simulate(sim, *simulate);
    if (*generate) return cmd_generate(parts, w_h, w_hw, gen_out);
#ifdef COPLAN_WITH_SERVER
    if (*serve) {
      ServerOptions o;
      o.address = address;
      o.port = static_cast<unsigned short>(port);
      o.service.model_dir = model_dir;
      o.service.journal_dir = log_dir;
      o.service.robot_time_scale = time_scale;
      o.service.human_timeout_s = human_timeout;
      if (!log_dir.empty()) std::filesystem::create_directories(log_dir);
      SessionServer server(o);
      std::fprintf(stderr, "coplan: serving coplan-proto/1 on %s:%u\n", address.c_str(), server.port());
      server.run(true);
      return 0;
    }
#endif
  } catch (const Error& e) {
    std::fprintf(stderr, "coplan: %s\n", e.what());
    // Bad models, scenarios, flags and unreadable inputs alike.
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "coplan: %s\n", e.what());
    return 1;
  }
  return 0;
}

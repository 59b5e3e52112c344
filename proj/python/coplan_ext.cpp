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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coplan/andor_graph.hpp"
#include "coplan/cooperation_model.hpp"
#include "coplan/error.hpp"
#include "coplan/pose.hpp"
#include "coplan/sim_engine.hpp"

namespace py = pybind11;
using namespace coplan;

namespace {

std::vector<std::string> arc_list(const AndOrGraph& g, std::span<const ArcId> arcs) {
  std::vector<std::string> out;
  for (ArcId a : arcs) out.push_back(g.arc(a).name);
  return out;
}

py::dict path_dict(const AndOrGraph& g, const CooperationPath& p) {
  py::list actions;
  for (const auto& ref : p.action_sequence) {
    const auto& a = g.action(ref);
    actions.append(py::make_tuple(g.arc(ref.arc).name, a.name, std::string(to_string(a.agent))));
  }
  py::dict d;
  d["arcs"] = arc_list(g, p.arcs);
  d["cost"] = p.cost;
  d["actions"] = actions;
  return d;
}

py::dict stats(const MetricStats& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["stddev"] = s.stddev;
  return d;
}

py::dict summary_dict(const BatchSummary& s) {
  py::dict d;
  d["trials"] = s.trials;
  d["successes"] = s.successes;
  d["success_rate"] = s.success_rate;
  d["T_m"] = stats(s.t_m);
  d["T_h"] = stats(s.t_h);
  d["T_r"] = stats(s.t_r);
  d["T_c"] = stats(s.t_c);
  d["pct_m"] = stats(s.pct_m);
  d["pct_h"] = stats(s.pct_h);
  d["pct_r"] = stats(s.pct_r);
  d["failure_counts"] = s.failure_counts;
  d["mean_hw_count"] = s.mean_hw_count;
  py::list trials;
  for (const auto& r : s.results) {
    py::dict t;
    t["trial"] = r.trial;
    t["status"] = r.status == TrialStatus::Success ? "success" : "failed";
    t["failure_reason"] = r.failure_reason;
    t["T_m"] = to_seconds(r.metrics.t_m);
    t["T_h"] = to_seconds(r.metrics.t_h);
    t["T_r"] = to_seconds(r.metrics.t_r);
    t["T_c"] = to_seconds(r.metrics.t_c);
    t["hw_count"] = r.hw_count;
    t["path"] = r.path_choice;
    trials.append(t);
  }
  d["results"] = trials;
  return d;
}

}  // namespace

PYBIND11_MODULE(_coplan, m) {
  m.doc() = "Cooperation planning on AND/OR graphs";

  // Kept alive for the life of the process; `code` carries the error name.
  static py::handle error_type = py::exception<Error>(m, "CoplanError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance =
          py::reinterpret_steal<py::object>(PyObject_CallFunction(error_type.ptr(), "s", e.what()));
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::class_<AndOrGraph>(m, "Graph")
      .def_static(
          "from_file", [](const std::string& path) { return load_graph(load_model_file(path)); }, py::arg("path"))
      .def_static(
          "from_json", [](const std::string& text) { return load_graph(parse_model(text)); }, py::arg("text"))
      .def_static(
          "palletization",
          [](int parts, double w_h, double w_hw) { return load_graph(generate_palletization(parts, w_h, w_hw)); },
          py::arg("parts"), py::arg("w_h") = 1.0, py::arg("w_hw") = 4.0)
      .def_property_readonly("name", &AndOrGraph::name)
      .def_property_readonly("node_count", &AndOrGraph::node_count)
      .def_property_readonly("arc_count", &AndOrGraph::arc_count)
      .def_property_readonly("solved", &AndOrGraph::solved)
      .def("status", [](const AndOrGraph& g) { return std::string(to_string(g.status().kind)); })
      .def("feasible",
           [](const AndOrGraph& g) {
             const auto fs = g.feasible_sets();
             std::vector<std::string> nodes;
             for (NodeId n : fs.nodes) nodes.push_back(g.node(n).name);
             return py::make_tuple(nodes, arc_list(g, fs.arcs));
           },
           "(feasible node names, feasible arc names)")
      .def("paths",
           [](const AndOrGraph& g) {
             py::list out;
             for (const auto& p : g.paths()) out.append(path_dict(g, p));
             return out;
           })
      .def("optimal_path", [](const AndOrGraph& g) { return path_dict(g, g.optimal_path()); })
      .def(
          "finish_action",
          [](AndOrGraph& g, const std::string& arc, const std::string& action) {
            const ArcId id = g.arc_id(arc);
            const auto progress = g.record_action_finished(id, action);
            if (progress.done) {
              const ArcId done[] = {id};
              g.update_status(done);
            }
            return progress.done;
          },
          py::arg("arc"), py::arg("action"), "Marks an action finished; returns True when its arc completes")
      .def("dump", &AndOrGraph::dump);

  m.def("generate_palletization",
        [](int parts, double w_h, double w_hw) { return serialize_model(generate_palletization(parts, w_h, w_hw)); },
        py::arg("parts"), py::arg("w_h") = 1.0, py::arg("w_hw") = 4.0, "Canonical model text");
  m.def("canonicalize", [](const std::string& text) { return serialize_model(parse_model(text)); },
        py::arg("text"));

  m.def(
      "simulate_scenario",
      [](const std::string& text, const std::string& base_dir) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::ConfigError, e.what());
        }
        const SimConfig config = parse_scenario(doc, base_dir);
        BatchSummary s;
        {
          py::gil_scoped_release release;
          s = run_batch(config);
        }
        return summary_dict(s);
      },
      py::arg("text"), py::arg("base_dir") = "", "Runs a scenario document and returns the batch summary");

  m.def(
      "compose_poses",
      [](const std::vector<Eigen::Matrix4d>& chain) {
        Pose out;
        for (const auto& mtx : chain) out = out * Pose(mtx);
        return Eigen::Matrix4d(out.matrix());
      },
      py::arg("chain"), "Product of 4x4 rigid transforms, left to right");
}

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

#include <fstream>
#include <sstream>

#include "coplan/error.hpp"
#include "coplan/sim_engine.hpp"

namespace coplan {

std::string format_results(std::span<const TrialResult> results, ExportFormat format) {
  std::ostringstream out;
  if (format == ExportFormat::Csv) {
    out << "trial,status,T_m,T_h,T_r,T_c,hw_count,failure_reason\n";
    for (const auto& r : results) {
      const bool ok = r.status == TrialStatus::Success;
      out << r.trial << ',' << (ok ? "success" : "failed") << ',';
      if (ok) {
        out << format_seconds(r.metrics.t_m) << ',' << format_seconds(r.metrics.t_h) << ','
            << format_seconds(r.metrics.t_r) << ',' << format_seconds(r.metrics.t_c) << ',';
      } else {
        out << ",,,,";
      }
      out << r.hw_count << ',' << r.failure_reason << '\n';
    }
    return out.str();
  }
  // JSON lines with the same field order; times are emitted as the same
  // fixed-decimal text to stay bit-stable.
  for (const auto& r : results) {
    const bool ok = r.status == TrialStatus::Success;
    out << "{\"trial\":" << r.trial << ",\"status\":\"" << (ok ? "success" : "failed") << "\"";
    auto field = [&](const char* name, Tick t) {
      out << ",\"" << name << "\":" << (ok ? format_seconds(t) : std::string("null"));
    };
    field("T_m", r.metrics.t_m);
    field("T_h", r.metrics.t_h);
    field("T_r", r.metrics.t_r);
    field("T_c", r.metrics.t_c);
    out << ",\"hw_count\":" << r.hw_count << ",\"failure_reason\":\"" << r.failure_reason << "\"}\n";
  }
  return out.str();
}

void export_results(std::span<const TrialResult> results, ExportFormat format,
                    const std::string& path) {
  if (results.empty()) throw Error(ErrorCode::IoError, "no results to export");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << format_results(results, format);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace coplan

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

#include "coplan/error.hpp"

#include <cstdio>

#include "coplan/virtual_time.hpp"

namespace coplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::EmptyChildren: return "EmptyChildren";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::InvalidInitialState: return "InvalidInitialState";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::PathsNotLoaded: return "PathsNotLoaded";
    case ErrorCode::UnknownMember: return "UnknownMember";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::ArcNotFeasible: return "ArcNotFeasible";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::ArcNotDone: return "ArcNotDone";
    case ErrorCode::NoViablePath: return "NoViablePath";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::StaleSeq: return "StaleSeq";
    case ErrorCode::InfeasibleAction: return "InfeasibleAction";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::NoRobotActionInFlight: return "NoRobotActionInFlight";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::NoFeasibleChoice: return "NoFeasibleChoice";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ModelNotFound: return "ModelNotFound";
    case ErrorCode::ModelInvalid: return "ModelInvalid";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::UnknownSession: return "UnknownSession";
  }
  return "Unknown";
}

std::string format_seconds(Tick ticks) {
  const bool negative = ticks < 0;
  const auto mag = static_cast<unsigned long long>(negative ? -ticks : ticks);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", negative ? "-" : "",
                mag / static_cast<unsigned long long>(kTicksPerSecond),
                mag % static_cast<unsigned long long>(kTicksPerSecond));
  return buf;
}

}  // namespace coplan

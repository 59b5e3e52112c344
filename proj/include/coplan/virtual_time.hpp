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

#include <cmath>
#include <cstdint>
#include <string>

namespace coplan {

/// Timestamps and intervals in integer microseconds. Integer ticks keep the
/// timing identities (T_c = T_m + T_h + T_r) exact under summation.
using Tick = std::int64_t;

inline constexpr Tick kTicksPerSecond = 1'000'000;

inline Tick to_ticks(double seconds) {
  return static_cast<Tick>(std::llround(seconds * static_cast<double>(kTicksPerSecond)));
}

inline double to_seconds(Tick ticks) {
  return static_cast<double>(ticks) / static_cast<double>(kTicksPerSecond);
}

/// Fixed six-decimal rendering computed from the integer value, so the text
/// is bit-stable regardless of floating-point formatting.
std::string format_seconds(Tick ticks);

}  // namespace coplan

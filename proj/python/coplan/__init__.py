# Copyright 2026 The coplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the coplan cooperation planner."""

import json
import os

from ._coplan import (
    CoplanError,
    Graph,
    canonicalize,
    compose_poses,
    generate_palletization,
    simulate_scenario,
)

__all__ = [
    "CoplanError",
    "Graph",
    "canonicalize",
    "compose_poses",
    "generate_palletization",
    "simulate",
    "simulate_scenario",
]


def simulate(scenario, base_dir=""):
    """Run a scenario given as a dict or a path to a scenario file."""
    if isinstance(scenario, (str, os.PathLike)):
        path = os.fspath(scenario)
        with open(path, encoding="utf-8") as f:
            text = f.read()
        return simulate_scenario(text, base_dir or os.path.dirname(os.path.abspath(path)))
    return simulate_scenario(json.dumps(scenario), os.fspath(base_dir))

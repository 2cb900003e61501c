# Copyright 2026 The hybridfl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the hybridfl C++ core."""

import json

from hybridfl._hybridfl import (
    Ciphertext,
    HeContext,
    add_noise,
    clip,
    config_keys,
    efficiency_ratio,
    merge,
    propose_partition,
    protect_dp,
    ratio_at,
    run_experiment_json,
    sensitivity,
    sigma_from_budget,
    split,
    target_count,
    theorem_bound,
    vote,
)


def run_experiment(config=None, workers=1, **overrides):
    """Runs an experiment and returns the parsed report.

    `config` maps dotted keys to values; keyword overrides use '__' for '.'
    (e.g. round__rounds_T=5).
    """
    pairs = {str(k): str(v) for k, v in (config or {}).items()}
    pairs.update({k.replace("__", "."): str(v) for k, v in overrides.items()})
    return json.loads(run_experiment_json(sorted(pairs.items()), workers))


__all__ = [
    "Ciphertext",
    "HeContext",
    "add_noise",
    "clip",
    "config_keys",
    "efficiency_ratio",
    "merge",
    "propose_partition",
    "protect_dp",
    "ratio_at",
    "run_experiment",
    "run_experiment_json",
    "sensitivity",
    "sigma_from_budget",
    "split",
    "target_count",
    "theorem_bound",
    "vote",
]

# Copyright 2026 The copasim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Python access to the COPA-GPU design-space model.

Structured results come back as plain dicts and lists.
"""

import json as _json

from . import _copa
from ._copa import (  # noqa: F401
    ContractError,
    ParseError,
    UnknownPresetError,
    ValidationError,
    energy_ratio_for_reduction,
    gen_dl,
    gen_hpc,
    geomean,
    hbm_resources,
    l3_budget,
    link_power,
    preset_names,
    trace_footprint,
    uhb_area_3d,
    uhb_edge_2p5d,
    validate,
)


def _doc(design):
    return design if isinstance(design, str) else _json.dumps(design)


def preset(name):
    return _json.loads(_copa.design_json(name))


def check_package(design):
    """`design` is a preset name or a design dict."""
    return _json.loads(_copa.check_package(_doc(design)))


def simulate(design, trace, xor_hash=False, per_kernel=False):
    """Cache traffic for a JSONL trace on a preset name or design dict."""
    return _json.loads(_copa.simulate(_doc(design), trace, xor_hash, per_kernel))


def oracle_simulate(trace, capacities):
    return _json.loads(_copa.oracle_simulate(trace, list(capacities)))


def run(design, trace, attribute=False, per_kernel=False):
    return _json.loads(_copa.run(_doc(design), trace, attribute, per_kernel))


def run_sweeps(spec, out_dir="", jobs=1, base_dir=""):
    return _json.loads(_copa.run_sweeps(_doc(spec), str(out_dir), jobs, str(base_dir)))


def report(results_dir, timestamp=False):
    """Returns (markdown, missing_inputs, figures)."""
    return _copa.report(str(results_dir), timestamp)

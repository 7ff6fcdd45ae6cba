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


import json
import math

import pytest

import copa

HPC = dict(working_set=16 << 20, reuse_fraction=0.5, flop_byte_ratio=2.0, kernels=4)


def test_presets_round_trip():
    names = copa.preset_names()
    assert {"V100", "A100", "GPU-N", "HBML+L3", "PerfectL2"} <= set(names)
    gpun = copa.preset("GPU-N")
    assert copa.validate(json.dumps(gpun)) == []
    with pytest.raises(KeyError):
        copa.preset("GPU-X")


def test_package_numbers():
    assert copa.uhb_area_3d(14.7) == pytest.approx(28.71, abs=0.05)
    bw, cap = copa.hbm_resources(6)
    assert bw == pytest.approx(2687, rel=1e-3)
    assert cap == pytest.approx(100, rel=1e-3)
    assert copa.check_package("HBML+L3")["violations"] == []
    # Baseline over COPA energy: the L3 costs something when it filters nothing.
    assert copa.energy_ratio_for_reduction(0.0) < 1.0
    assert copa.energy_ratio_for_reduction(0.5) < copa.energy_ratio_for_reduction(0.8)


def test_trace_simulate_and_run():
    trace = copa.gen_hpc(**HPC)
    assert trace == copa.gen_hpc(**HPC)
    assert copa.trace_footprint(trace) > 0

    base = copa.simulate("GPU-N", trace)
    l3 = copa.simulate("HBML+L3", trace)
    assert l3["total"]["dram"]["read_bytes"] <= base["total"]["dram"]["read_bytes"]

    out = copa.run("HBML+L3", trace, attribute=True)
    assert out["result"]["total_seconds"] > 0
    assert math.isfinite(out["energy"]["total_j"])
    assert "attribution" in out


def test_oracle_agrees_with_simulator():
    trace = copa.gen_hpc(**HPC, line_size=65536)
    fa = copa.oracle_simulate(trace, [8 << 20])
    assert fa["total"]["l2"]["accesses"] > 0


def test_bad_trace_raises():
    with pytest.raises(ValueError):
        copa.simulate("GPU-N", "not json\n")


def test_sweep_and_report(tmp_path):
    spec = {
        "seed": 1,
        "sweeps": [
            {"name": "bw", "axis": "dram_bw_multiplier", "points": [1, 2],
             "suite": [{"hpc": {"working_set": "16MB", "reuse_fraction": 0.5,
                                "flop_byte_ratio": 2, "kernels": 4}}]},
        ],
    }
    one = copa.run_sweeps(spec, tmp_path / "a", jobs=1)
    two = copa.run_sweeps(spec, tmp_path / "b", jobs=2)
    assert one == two
    assert one[0]["csv"].startswith("workload,regime,axis_value,speedup")
    md, missing, figures = copa.report(tmp_path / "a")
    assert missing == []
    assert "# " in md

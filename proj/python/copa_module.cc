// Copyright 2026 The copasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Thin bindings: structured values cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "copa/arch_config.h"
#include "copa/cache_sim.h"
#include "copa/energy_model.h"
#include "copa/errors.h"
#include "copa/package_model.h"
#include "copa/perf_model.h"
#include "copa/report.h"
#include "copa/sweep_harness.h"
#include "copa/workload_gen.h"

namespace py = pybind11;

namespace copa {
namespace {

using nlohmann::json;

// A preset name or a design document.
CopaDesign ResolveDesign(const std::string& design) {
  const auto& names = PresetNames();
  if (std::find(names.begin(), names.end(), design) != names.end()) return Preset(design);
  return LoadDesign(design);
}

Trace ParseTrace(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return ReadTraceJsonl(in);
}

std::string TraceText(const Trace& t) {
  std::ostringstream out;
  WriteTraceJsonl(t, out);
  return out.str();
}

std::string DesignJson(const std::string& name) { return SerializeDesign(Preset(name)); }

std::vector<std::string> ValidateDesign(const std::string& doc) {
  return Validate(DesignFromJson(json::parse(doc)));
}

std::string CheckPackage(const std::string& design) {
  const auto& names = PresetNames();
  const CopaDesign d = std::find(names.begin(), names.end(), design) != names.end()
                           ? Preset(design)
                           : DesignFromJson(json::parse(design));
  std::vector<std::string> violations = Validate(d);
  FeasibilityReport r = CheckFeasibility(d, TechFor(d.integration), DieSpec{}, DefaultMsmDie(d));
  violations.insert(violations.end(), r.violations.begin(), r.violations.end());
  r.violations = violations;
  return ToJson(r).dump();
}

std::string GenDl(const std::string& preset, const std::string& mode, std::uint64_t batch,
                  std::uint64_t seed, std::uint32_t line_size) {
  return TraceText(GenDlTrace(DlPreset(preset, ParseMode(mode)), batch, seed, line_size));
}

std::string GenHpc(std::uint64_t working_set, double reuse, double flop_byte,
                   std::uint32_t kernels, std::uint64_t seed, std::uint32_t line_size) {
  return TraceText(GenHpcTrace(working_set, reuse, flop_byte, kernels, seed, line_size));
}

std::uint64_t TraceFootprint(const std::string& jsonl) { return ParseTrace(jsonl).footprint; }

std::string SimulateTrace(const std::string& design, const std::string& jsonl, bool xor_hash,
                          bool per_kernel) {
  const Trace t = ParseTrace(jsonl);
  const CopaDesign d = WithLineSize(ResolveDesign(design), t.line_size);
  return ToJson(Simulate(t, d, {xor_hash}), per_kernel).dump();
}

std::string OracleTrace(const std::string& jsonl, const std::vector<std::uint64_t>& capacities) {
  return ToJson(OracleSimulate(ParseTrace(jsonl), capacities), true).dump();
}

std::string RunTrace(const std::string& design, const std::string& jsonl, bool attribute,
                     bool per_kernel) {
  const Trace t = ParseTrace(jsonl);
  const CopaDesign d = WithLineSize(ResolveDesign(design), t.line_size);
  const TrafficReport traffic = Simulate(t, d);
  json out = {{"design", d.name},
              {"trace", t.name},
              {"result", ToJson(TimeTrace(t, traffic, d), per_kernel)},
              {"energy", ToJson(MemoryEnergy(traffic, EnergyParamsFor(d)))}};
  if (attribute) out["attribution"] = ToJson(Attribute(t, traffic, d));
  return out.dump();
}

std::string RunSweeps(const std::string& spec, const std::string& out_dir, int jobs,
                      const std::string& base_dir) {
  const auto specs = LoadSweepSpecs(json::parse(spec), base_dir);
  std::vector<SweepResult> results;
  {
    py::gil_scoped_release release;
    Evaluator eval(SweepOptions{std::max(1, jobs)});
    for (const auto& s : specs) results.push_back(RunSweep(s, eval));
    if (!out_dir.empty()) WriteSweepOutputs(results, out_dir);
  }
  json summary = json::array();
  for (const auto& r : results) {
    json j = SweepSummary(r);
    std::ostringstream csv;
    WriteSweepCsv(r, csv);
    j["csv"] = csv.str();
    summary.push_back(std::move(j));
  }
  return summary.dump();
}

py::tuple Report(const std::string& dir, bool timestamp) {
  const ReportOutput r = BuildReport(dir, timestamp);
  return py::make_tuple(r.markdown, r.missing, r.figures);
}

}  // namespace
}  // namespace copa

PYBIND11_MODULE(_copa, m) {
  using namespace copa;
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UnknownPresetError>(m, "UnknownPresetError", PyExc_KeyError);

  m.def("preset_names", [] { return PresetNames(); });
  m.def("design_json", &DesignJson, py::arg("name"));
  m.def("validate", &ValidateDesign, py::arg("design_json"));
  m.def("check_package", &CheckPackage, py::arg("design"));

  m.def("uhb_area_3d", [](double tbps) { return UhbArea3d(tbps, TechParams::Stacked3d()); },
        py::arg("bandwidth_tbps"));
  m.def("uhb_edge_2p5d", [](double tbps) { return UhbEdge2p5d(tbps, TechParams::Planar2p5d()); },
        py::arg("bandwidth_tbps"));
  m.def(
      "link_power",
      [](double tbps, double pj_per_bit, double toggle) {
        TechParams t;
        t.energy_per_bit_pj = pj_per_bit;
        return LinkPower(tbps, t, toggle);
      },
      py::arg("bandwidth_tbps"), py::arg("pj_per_bit") = 0.3, py::arg("toggle_rate") = 0.25);
  m.def(
      "hbm_resources",
      [](int sites) {
        const auto r = HbmResourcesFor(sites, Preset("GPU-N").dram);
        return py::make_tuple(r.bandwidth_gbps, r.capacity_gb);
      },
      py::arg("sites"));
  m.def("l3_budget", [](double mm2) { return L3Budget(mm2, DieSpec{}); }, py::arg("msm_area_mm2"));
  m.def("energy_ratio_for_reduction", [](double r) { return EnergyRatioForReduction(r); },
        py::arg("reduction"));

  m.def("gen_dl", &GenDl, py::arg("preset"), py::arg("mode"), py::arg("batch"),
        py::arg("seed") = 1, py::arg("line_size") = 128);
  m.def("gen_hpc", &GenHpc, py::arg("working_set"), py::arg("reuse_fraction"),
        py::arg("flop_byte_ratio"), py::arg("kernels"), py::arg("seed") = 1,
        py::arg("line_size") = 128);
  m.def("trace_footprint", &TraceFootprint, py::arg("trace_jsonl"));
  m.def("simulate", &SimulateTrace, py::arg("design"), py::arg("trace_jsonl"),
        py::arg("xor_hash") = false, py::arg("per_kernel") = false);
  m.def("oracle_simulate", &OracleTrace, py::arg("trace_jsonl"), py::arg("capacities"));
  m.def("run", &RunTrace, py::arg("design"), py::arg("trace_jsonl"), py::arg("attribute") = false,
        py::arg("per_kernel") = false);
  m.def("run_sweeps", &RunSweeps, py::arg("spec_json"), py::arg("out_dir") = "",
        py::arg("jobs") = 1, py::arg("base_dir") = "");
  m.def("report", &Report, py::arg("results_dir"), py::arg("timestamp") = false);
  m.def("geomean", [](const std::vector<double>& v) { return Geomean(v); }, py::arg("values"));
}

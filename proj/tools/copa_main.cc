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

// copa: trace generation, simulation, package checks, sweeps and reports.
//
// Exit codes: 0 success, 1 validation/feasibility failure or bad input data,
// 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "copa/arch_config.h"
#include "copa/energy_model.h"
#include "copa/errors.h"
#include "copa/package_model.h"
#include "copa/perf_model.h"
#include "copa/report.h"
#include "copa/sweep_harness.h"
#include "copa/workload_gen.h"
#include "fmt/format.h"
#include "json.hpp"

namespace {

using namespace copa;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Preset names win over file paths.
CopaDesign ResolveDesign(const std::string& arg, bool validate) {
  try {
    return Preset(arg);
  } catch (const UnknownPresetError& e) {
    std::ifstream probe(arg);
    if (!probe) throw UsageError(e.what());
  }
  const std::string text = ReadFile(arg);
  if (validate) return LoadDesign(text);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  return DesignFromJson(doc);
}

int CmdPresets(bool workloads) {
  for (const auto& name : PresetNames()) fmt::print("{}\n", name);
  if (workloads) {
    for (const auto& info : DlPresetCatalog()) {
      fmt::print("{}/{} batch {}..{}\n", info.name, ToString(info.mode), info.small_batch,
                 info.large_batch);
    }
  }
  return kOk;
}

struct GenArgs {
  std::string preset;
  std::string mode = "training";
  std::uint64_t batch = 0;
  std::uint64_t seed = 1;
  std::string output;
  std::uint32_t line_size = 128;
  std::string working_set = "512MB";
  double reuse = 0.1;
  double flop_byte = 4.0;
  std::uint32_t kernels = 16;
};

int CmdGen(const GenArgs& a) {
  if (!IsPowerOfTwo(a.line_size)) throw UsageError("--line-size must be a power of two");
  Trace trace;
  if (a.preset == "hpc") {
    trace = GenHpcTrace(ParseBytes(a.working_set), a.reuse, a.flop_byte, a.kernels, a.seed,
                        a.line_size);
  } else {
    Mode mode;
    try {
      mode = ParseMode(a.mode);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    DlModelSpec model;
    try {
      model = DlPreset(a.preset, mode);
    } catch (const UnknownPresetError& e) {
      throw UsageError(e.what());
    }
    const std::uint64_t batch = a.batch ? a.batch : DlPresetInfoFor(a.preset, mode).large_batch;
    trace = GenDlTrace(model, batch, a.seed, a.line_size);
  }
  if (a.output.empty() || a.output == "-") {
    WriteTraceJsonl(trace, std::cout);
  } else {
    std::ofstream out(a.output, std::ios::binary);
    if (!out) throw UsageError(fmt::format("cannot write '{}'", a.output));
    WriteTraceJsonl(trace, out);
  }
  std::cerr << fmt::format("{}: {} kernels, footprint {:.3f} GB\n", trace.name,
                           trace.kernels.size(), static_cast<double>(trace.footprint) / kGB);
  return kOk;
}

struct RunArgs {
  std::string design;
  std::string trace;
  bool attribute = false;
  bool per_kernel = false;
  bool xor_hash = false;
};

int CmdRun(const RunArgs& a) {
  const CopaDesign preset = ResolveDesign(a.design, true);
  std::ifstream in(a.trace);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", a.trace));
  const Trace trace = ReadTraceJsonl(in);
  // Table designs are specified at 128 B; follow the trace's granularity.
  const CopaDesign design = WithLineSize(preset, trace.line_size);

  SimOptions options;
  options.xor_set_hash = a.xor_hash;
  const TrafficReport traffic = Simulate(trace, design, options);
  const SimResult result = TimeTrace(trace, traffic, design);
  nlohmann::json out = {{"design", design.name},
                        {"trace", trace.name},
                        {"result", ToJson(result, a.per_kernel)},
                        {"energy", ToJson(MemoryEnergy(traffic, EnergyParamsFor(design)))}};
  if (a.attribute) out["attribution"] = ToJson(Attribute(trace, traffic, design));
  fmt::print("{}\n", out.dump(2));
  return kOk;
}

struct SweepArgs {
  std::string spec;
  std::string output = "results";
  int jobs = 0;
};

int CmdSweep(const SweepArgs& a) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ReadFile(a.spec));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(a.spec, e.what());
  }
  const auto specs = LoadSweepSpecs(doc, std::filesystem::path(a.spec).parent_path());
  SweepOptions options;
  options.jobs = a.jobs;
  if (options.jobs <= 0) {
    const char* env = std::getenv("COPA_JOBS");
    options.jobs = env ? std::max(1, std::atoi(env)) : 1;
  }
  Evaluator eval(options);
  std::vector<SweepResult> results;
  for (const auto& spec : specs) {
    std::cerr << fmt::format("sweep {} ({}): {} workloads\n", spec.name, ToString(spec.axis),
                             spec.suite.size());
    results.push_back(RunSweep(spec, eval));
  }
  for (const auto& f : WriteSweepOutputs(results, a.output)) fmt::print("{}\n", f.string());
  return kOk;
}

int CmdPackageCheck(const std::string& design_arg, const std::string& tech_arg) {
  const CopaDesign design = ResolveDesign(design_arg, false);
  TechParams tech = TechFor(design.integration);
  if (tech_arg == "2.5d") {
    tech = TechParams::Planar2p5d();
  } else if (tech_arg == "3d") {
    tech = TechParams::Stacked3d();
  } else if (!tech_arg.empty()) {
    throw UsageError("--tech must be 2.5d or 3d");
  }
  std::vector<std::string> violations = Validate(design);
  FeasibilityReport report = CheckFeasibility(design, tech, DieSpec{}, DefaultMsmDie(design));
  violations.insert(violations.end(), report.violations.begin(), report.violations.end());
  report.violations = violations;
  fmt::print("{}\n", nlohmann::json{{"design", design.name}, {"feasibility", ToJson(report)}}.dump(2));
  for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
  return violations.empty() ? kOk : kFailure;
}

int CmdReport(const std::string& dir, const std::string& output, bool deterministic) {
  const ReportOutput report = BuildReport(dir, !deterministic);
  if (!report.ok()) {
    for (const auto& m : report.missing) std::cerr << "missing: " << m << "\n";
    return kFailure;
  }
  if (output.empty() || output == "-") {
    std::cout << report.markdown;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw UsageError(fmt::format("cannot write '{}'", output));
    out << report.markdown;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composable GPU memory-system simulator"};
  app.require_subcommand(1);

  bool list_workloads = false;
  auto* presets = app.add_subcommand("presets", "List design presets");
  presets->add_flag("--workloads", list_workloads, "Also list DL workload presets");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic trace (JSONL)");
  gen_cmd->add_option("--preset", gen.preset, "DL preset name, or 'hpc'")->required();
  gen_cmd->add_option("--mode", gen.mode, "training or inference");
  gen_cmd->add_option("--batch", gen.batch, "Per-GPU batch (default: large reference batch)");
  gen_cmd->add_option("--seed", gen.seed, "Seed for pseudo-random orders");
  gen_cmd->add_option("-o,--output", gen.output, "Output file (default stdout)");
  gen_cmd->add_option("--line-size", gen.line_size, "Trace line size in bytes");
  gen_cmd->add_option("--working-set", gen.working_set, "hpc: working set, e.g. 512MB");
  gen_cmd->add_option("--reuse", gen.reuse, "hpc: reused fraction of the working set");
  gen_cmd->add_option("--flop-byte", gen.flop_byte, "hpc: FLOPs per byte moved");
  gen_cmd->add_option("--kernels", gen.kernels, "hpc: kernel count");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a trace on a design");
  run_cmd->add_option("--design", run.design, "Preset name or design JSON file")->required();
  run_cmd->add_option("--trace", run.trace, "Trace JSONL file")->required();
  run_cmd->add_flag("--attribute", run.attribute, "Add the bottleneck attribution");
  run_cmd->add_flag("--per-kernel", run.per_kernel, "Include per-kernel timings and traffic");
  run_cmd->add_flag("--xor-hash", run.xor_hash, "XOR-fold set indexing");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run sweeps from a JSON spec");
  sweep_cmd->add_option("--spec", sweep.spec, "Sweep spec JSON")->required();
  sweep_cmd->add_option("-o,--output", sweep.output, "Results directory");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (default: COPA_JOBS or 1)");

  std::string pkg_design, pkg_tech;
  auto* pkg_cmd = app.add_subcommand("package", "Packaging checks");
  pkg_cmd->require_subcommand(1);
  auto* check_cmd = pkg_cmd->add_subcommand("check", "Check packaging feasibility");
  check_cmd->add_option("--design", pkg_design, "Preset name or design JSON file")->required();
  check_cmd->add_option("--tech", pkg_tech, "Override link technology: 2.5d or 3d");

  std::string report_dir, report_out;
  bool deterministic = true;
  auto* report_cmd = app.add_subcommand("report", "Summarize a sweep results directory");
  report_cmd->add_option("dir", report_dir, "Results directory")->required();
  report_cmd->add_option("-o,--output", report_out, "Output markdown file (default stdout)");
  report_cmd->add_flag("--deterministic,!--timestamp", deterministic,
                       "Omit the timestamp header (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*presets) return CmdPresets(list_workloads);
    if (*gen_cmd) return CmdGen(gen);
    if (*run_cmd) return CmdRun(run);
    if (*sweep_cmd) return CmdSweep(sweep);
    if (*pkg_cmd) return CmdPackageCheck(pkg_design, pkg_tech);
    if (*report_cmd) return CmdReport(report_dir, report_out, deterministic);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

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

#ifndef COPA_SWEEP_HARNESS_H_
#define COPA_SWEEP_HARNESS_H_

// Parameter sweeps over (workload suite x design variants), normalized to a
// base design and aggregated by geometric mean per regime.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "copa/arch_config.h"
#include "copa/cache_sim.h"
#include "copa/perf_model.h"
#include "copa/workload_gen.h"
#include "json.hpp"

namespace copa {

enum class Regime { kTrainLb, kTrainSb, kInferLb, kInferSb, kHpc };
std::string_view ToString(Regime r);
Regime ParseRegime(std::string_view s);

enum class SweepAxis { kDramBwMultiplier, kLlcCapacity, kL3LinkBw, kNamedDesigns, kGpuCount };
std::string_view ToString(SweepAxis a);
SweepAxis ParseAxis(std::string_view s);

struct HpcParams {
  std::uint64_t working_set = 0;  // bytes
  double reuse_fraction = 0;
  double flop_byte_ratio = 0;
  std::uint32_t kernels = 1;
};

// How to obtain a trace: a DL preset at some batch, an HPC generator, or a
// trace file.
struct WorkloadRef {
  enum class Kind { kDl, kHpc, kFile };
  Kind kind = Kind::kDl;
  std::string name;
  Regime regime = Regime::kTrainLb;
  std::string preset;
  Mode mode = Mode::kTraining;
  std::uint64_t batch = 1;
  HpcParams hpc;
  std::string path;
  std::uint64_t seed = 1;

  // Same workload at another per-GPU batch (DL only).
  WorkloadRef WithBatch(std::uint64_t batch) const;
  // Identity for memoization.
  std::string key() const;
};

WorkloadRef DlWorkload(std::string_view preset, Mode mode, std::uint64_t batch, Regime regime,
                       std::uint64_t seed = 1);
WorkloadRef HpcWorkload(std::string_view name, const HpcParams& params, std::uint64_t seed = 1);

// Every DL preset at its small and large batch, tagged by regime.
std::vector<WorkloadRef> DlSuite(std::uint64_t seed = 1);
std::vector<WorkloadRef> HpcSuite(std::uint64_t seed = 1);
std::vector<WorkloadRef> FilterRegime(const std::vector<WorkloadRef>& suite, Regime regime);

// Simulation line size for a trace. 0 selects it from the footprint so a
// trace spans about 64K lines (128 B to 64 KiB).
std::uint32_t AutoLineSize(std::uint64_t footprint);

struct AxisPoint {
  std::string label;
  double value = 0;  // numeric axes; +inf for "perfect"/"inf"
};

struct SweepSpec {
  std::string name;
  SweepAxis axis = SweepAxis::kDramBwMultiplier;
  std::vector<WorkloadRef> suite;
  CopaDesign base_design;
  // Design the axis is applied to; defaults to base_design.
  std::optional<CopaDesign> target_design;
  std::vector<AxisPoint> points;
  // named_designs: one design per point (resolved from the labels when
  // empty). gpu_count: extra single-GPU columns against the scaled baseline.
  std::vector<CopaDesign> designs;
  std::uint32_t line_size = 0;  // 0 = auto
};

struct SweepResult {
  std::string name;
  SweepAxis axis = SweepAxis::kDramBwMultiplier;
  std::vector<std::string> points;       // column labels
  std::vector<std::string> workloads;
  std::vector<Regime> regimes;           // per workload
  // [workload][point]
  std::vector<std::vector<double>> speedup;
  std::vector<std::vector<std::optional<double>>> traffic_reduction;
  std::vector<std::vector<double>> dram_gb;
  std::vector<std::vector<std::optional<double>>> energy_ratio;

  // Geomean speedup per point over workloads whose regime is in `regimes`
  // (all workloads if empty).
  std::vector<double> Geomean(const std::vector<Regime>& regimes = {}) const;
  std::optional<std::size_t> PointIndex(std::string_view label) const;
};

// exp(mean(log v)). Throws ContractError on empty input or non-positive values.
double Geomean(const std::vector<double>& values);

struct SweepOptions {
  int jobs = 1;
  PerfParams perf;
};

// Memoizes traces and traffic reports across sweeps. Thread-safe.
class Evaluator {
 public:
  explicit Evaluator(SweepOptions options = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  const SweepOptions& options() const;

  // Trace at its simulation granularity (`line_size`, 0 = auto).
  std::shared_ptr<const Trace> GetTrace(const WorkloadRef& w, std::uint32_t line_size = 0);
  std::shared_ptr<const TrafficReport> GetTraffic(const WorkloadRef& w, const CopaDesign& design,
                                                  std::uint32_t line_size = 0);

  // Design rebased to the trace's line size, simulated and timed.
  SimResult Evaluate(const WorkloadRef& w, const CopaDesign& design, std::uint32_t line_size = 0);
  TimeBreakdown Attribution(const WorkloadRef& w, const CopaDesign& design,
                            std::uint32_t line_size = 0);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Default points per axis.
std::vector<AxisPoint> DefaultPoints(SweepAxis axis);

SweepResult RunSweep(const SweepSpec& spec, Evaluator& eval);
SweepResult SweepDramBw(const SweepSpec& spec, Evaluator& eval);
SweepResult SweepLlc(const SweepSpec& spec, Evaluator& eval);
SweepResult SweepL3LinkBw(const SweepSpec& spec, Evaluator& eval);
SweepResult CompareDesigns(const SweepSpec& spec, Evaluator& eval);
SweepResult ScaleOut(const SweepSpec& spec, Evaluator& eval);

// Variants along each axis.
CopaDesign WithDramMultiplier(CopaDesign d, double multiplier);
CopaDesign WithLlcCapacity(CopaDesign d, std::uint64_t capacity);  // fully associative
// Link and L3 bandwidth per direction = multiplier x `reference_dram_gbps`.
CopaDesign WithLinkMultiplier(CopaDesign d, double multiplier, double reference_dram_gbps);

// A sweep document: {"seed", "line_size", "sweeps": [...]}. Throws ParseError.
std::vector<SweepSpec> LoadSweepSpecs(const nlohmann::json& doc,
                                      const std::filesystem::path& base_dir = {});

// CSV columns: workload,regime,axis_value,speedup,traffic_reduction,dram_gb,energy_ratio
void WriteSweepCsv(const SweepResult& r, std::ostream& out);
nlohmann::json SweepSummary(const SweepResult& r);
// One CSV per sweep plus summary.json; returns the files written.
std::vector<std::filesystem::path> WriteSweepOutputs(const std::vector<SweepResult>& results,
                                                     const std::filesystem::path& dir);

}  // namespace copa

#endif  // COPA_SWEEP_HARNESS_H_

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

#include "copa/sweep_harness.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "copa/energy_model.h"
#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

std::string_view ToString(Regime r) {
  switch (r) {
    case Regime::kTrainLb: return "train_lb";
    case Regime::kTrainSb: return "train_sb";
    case Regime::kInferLb: return "infer_lb";
    case Regime::kInferSb: return "infer_sb";
    case Regime::kHpc: return "hpc";
  }
  return "?";
}

Regime ParseRegime(std::string_view s) {
  for (Regime r : {Regime::kTrainLb, Regime::kTrainSb, Regime::kInferLb, Regime::kInferSb,
                   Regime::kHpc}) {
    if (ToString(r) == s) return r;
  }
  throw std::invalid_argument(fmt::format("unknown regime '{}'", s));
}

std::string_view ToString(SweepAxis a) {
  switch (a) {
    case SweepAxis::kDramBwMultiplier: return "dram_bw_multiplier";
    case SweepAxis::kLlcCapacity: return "llc_capacity";
    case SweepAxis::kL3LinkBw: return "l3_link_bw";
    case SweepAxis::kNamedDesigns: return "named_designs";
    case SweepAxis::kGpuCount: return "gpu_count";
  }
  return "?";
}

SweepAxis ParseAxis(std::string_view s) {
  for (SweepAxis a : {SweepAxis::kDramBwMultiplier, SweepAxis::kLlcCapacity,
                      SweepAxis::kL3LinkBw, SweepAxis::kNamedDesigns, SweepAxis::kGpuCount}) {
    if (ToString(a) == s) return a;
  }
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}'", s));
}

// ---------------------------------------------------------------------------
// Workloads

WorkloadRef WorkloadRef::WithBatch(std::uint64_t b) const {
  if (kind != Kind::kDl) throw ContractError("only DL workloads can be rebatched");
  WorkloadRef w = *this;
  w.batch = b;
  return w;
}

std::string WorkloadRef::key() const {
  switch (kind) {
    case Kind::kDl:
      return fmt::format("dl:{}:{}:{}:{}", preset, ToString(mode), batch, seed);
    case Kind::kHpc:
      return fmt::format("hpc:{}:{:.17g}:{:.17g}:{}:{}", hpc.working_set, hpc.reuse_fraction,
                         hpc.flop_byte_ratio, hpc.kernels, seed);
    case Kind::kFile:
      return "file:" + path;
  }
  return {};
}

WorkloadRef DlWorkload(std::string_view preset, Mode mode, std::uint64_t batch, Regime regime,
                       std::uint64_t seed) {
  DlPresetInfoFor(preset, mode);  // validates the name
  WorkloadRef w;
  w.kind = WorkloadRef::Kind::kDl;
  w.preset = preset;
  w.mode = mode;
  w.batch = batch;
  w.regime = regime;
  w.seed = seed;
  w.name = fmt::format("{}-{}-b{}", preset, mode == Mode::kTraining ? "train" : "infer", batch);
  return w;
}

WorkloadRef HpcWorkload(std::string_view name, const HpcParams& params, std::uint64_t seed) {
  WorkloadRef w;
  w.kind = WorkloadRef::Kind::kHpc;
  w.name = name;
  w.regime = Regime::kHpc;
  w.hpc = params;
  w.seed = seed;
  return w;
}

std::vector<WorkloadRef> DlSuite(std::uint64_t seed) {
  std::vector<WorkloadRef> suite;
  for (const auto& info : DlPresetCatalog()) {
    const bool train = info.mode == Mode::kTraining;
    suite.push_back(DlWorkload(info.name, info.mode, info.large_batch,
                               train ? Regime::kTrainLb : Regime::kInferLb, seed));
  }
  for (const auto& info : DlPresetCatalog()) {
    const bool train = info.mode == Mode::kTraining;
    suite.push_back(DlWorkload(info.name, info.mode, info.small_batch,
                               train ? Regime::kTrainSb : Regime::kInferSb, seed));
  }
  return suite;
}

std::vector<WorkloadRef> HpcSuite(std::uint64_t seed) {
  // Working set, reused fraction, FLOP/byte, kernels.
  return {
      HpcWorkload("hpc-stencil", {48 * kMiB, 0.25, 3.0, 16}, seed),
      HpcWorkload("hpc-particle", {24 * kMiB, 0.5, 24.0, 8}, seed),
      HpcWorkload("hpc-dense", {384 * kMiB, 0.05, 16.0, 24}, seed),
      HpcWorkload("hpc-spectral", {768 * kMiB, 0.1, 12.0, 16}, seed),
      HpcWorkload("hpc-sparse", {1024 * kMiB, 0.02, 4.0, 32}, seed),
  };
}

std::vector<WorkloadRef> FilterRegime(const std::vector<WorkloadRef>& suite, Regime regime) {
  std::vector<WorkloadRef> out;
  std::copy_if(suite.begin(), suite.end(), std::back_inserter(out),
               [&](const WorkloadRef& w) { return w.regime == regime; });
  return out;
}

std::uint32_t AutoLineSize(std::uint64_t footprint) {
  constexpr std::uint64_t kTargetLines = 64 * 1024;
  const std::uint64_t want = std::bit_ceil(std::max<std::uint64_t>(1, (footprint + kTargetLines - 1) / kTargetLines));
  return static_cast<std::uint32_t>(std::clamp<std::uint64_t>(want, 128, 64 * kKiB));
}

// ---------------------------------------------------------------------------
// Evaluator

namespace {

template <typename T>
class Memo {
 public:
  template <typename Fn>
  std::shared_ptr<const T> Get(const std::string& key, Fn&& make) {
    std::promise<std::shared_ptr<const T>> promise;
    std::shared_future<std::shared_ptr<const T>> future;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        future = promise.get_future().share();
        entries_.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const T>(make()));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_future<std::shared_ptr<const T>>> entries_;
};

std::string CacheKey(const CopaDesign& d) {
  std::string key = fmt::format("{}|{}|{}|{}", d.l2.line_size, d.l2.capacity, d.l2.associativity,
                                d.msm_present);
  if (d.msm_present && d.l3) key += fmt::format("|{}|{}", d.l3->capacity, d.l3->associativity);
  return key;
}

Trace Generate(const WorkloadRef& w) {
  switch (w.kind) {
    case WorkloadRef::Kind::kDl:
      return GenDlTrace(DlPreset(w.preset, w.mode), w.batch, w.seed);
    case WorkloadRef::Kind::kHpc:
      return GenHpcTrace(w.hpc.working_set, w.hpc.reuse_fraction, w.hpc.flop_byte_ratio,
                         w.hpc.kernels, w.seed);
    case WorkloadRef::Kind::kFile: {
      std::ifstream in(w.path);
      if (!in) throw ParseError(w.path, "cannot open trace file");
      return ReadTraceJsonl(in);
    }
  }
  throw ContractError("unknown workload kind");
}

}  // namespace

struct Evaluator::Impl {
  SweepOptions options;
  Memo<Trace> traces;
  Memo<TrafficReport> traffic;
};

Evaluator::Evaluator(SweepOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
}
Evaluator::~Evaluator() = default;

const SweepOptions& Evaluator::options() const { return impl_->options; }

std::shared_ptr<const Trace> Evaluator::GetTrace(const WorkloadRef& w, std::uint32_t line_size) {
  auto raw = impl_->traces.Get(w.key(), [&] { return Generate(w); });
  const std::uint32_t line = line_size ? line_size : AutoLineSize(raw->footprint);
  if (line == raw->line_size) return raw;
  return impl_->traces.Get(fmt::format("{}@{}", w.key(), line), [&] {
    Trace t = *raw;
    t.line_size = line;
    FinalizeTrace(t);
    return t;
  });
}

std::shared_ptr<const TrafficReport> Evaluator::GetTraffic(const WorkloadRef& w,
                                                           const CopaDesign& design,
                                                           std::uint32_t line_size) {
  auto trace = GetTrace(w, line_size);
  const CopaDesign d = WithLineSize(design, trace->line_size);
  return impl_->traffic.Get(fmt::format("{}#{}", w.key(), CacheKey(d)),
                            [&] { return Simulate(*trace, d); });
}

SimResult Evaluator::Evaluate(const WorkloadRef& w, const CopaDesign& design,
                              std::uint32_t line_size) {
  auto trace = GetTrace(w, line_size);
  auto traffic = GetTraffic(w, design, line_size);
  return TimeTrace(*trace, *traffic, WithLineSize(design, trace->line_size),
                   impl_->options.perf);
}

TimeBreakdown Evaluator::Attribution(const WorkloadRef& w, const CopaDesign& design,
                                     std::uint32_t line_size) {
  auto trace = GetTrace(w, line_size);
  auto traffic = GetTraffic(w, design, line_size);
  return Attribute(*trace, *traffic, WithLineSize(design, trace->line_size), impl_->options.perf);
}

// ---------------------------------------------------------------------------
// Sweeps

double Geomean(const std::vector<double>& values) {
  if (values.empty()) throw ContractError("geomean of an empty list");
  double sum = 0;
  for (double v : values) {
    if (!(v > 0)) throw ContractError(fmt::format("geomean needs positive values (got {})", v));
    sum += std::log(v);
  }
  return std::exp(sum / static_cast<double>(values.size()));
}

std::vector<double> SweepResult::Geomean(const std::vector<Regime>& wanted) const {
  std::vector<double> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> column;
    for (std::size_t w = 0; w < workloads.size(); ++w) {
      if (wanted.empty() ||
          std::find(wanted.begin(), wanted.end(), regimes[w]) != wanted.end()) {
        column.push_back(speedup[w][p]);
      }
    }
    out.push_back(column.empty() ? std::nan("") : copa::Geomean(column));
  }
  return out;
}

std::optional<std::size_t> SweepResult::PointIndex(std::string_view label) const {
  auto it = std::find(points.begin(), points.end(), label);
  if (it == points.end()) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin());
}

std::vector<AxisPoint> DefaultPoints(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kDramBwMultiplier:
      return {{"0.5", 0.5}, {"0.75", 0.75}, {"1", 1}, {"1.5", 1.5},
              {"2", 2},     {"3", 3},       {"inf", kInfinity}};
    case SweepAxis::kLlcCapacity: {
      std::vector<AxisPoint> pts;
      for (std::uint64_t mb : {60, 120, 240, 480, 960, 1920, 3840}) {
        pts.push_back({fmt::format("{}MB", mb), static_cast<double>(mb * kMiB)});
      }
      pts.push_back({"perfect", kInfinity});
      return pts;
    }
    case SweepAxis::kL3LinkBw:
      return {{"0.5+0.5", 0.5}, {"1+1", 1}, {"2+2", 2}, {"4+4", 4}, {"inf", kInfinity}};
    case SweepAxis::kNamedDesigns:
      return {{"GPU-N", 0},    {"HBM+L3", 0},    {"HBML+L3", 0}, {"HBM+L3L", 0},
              {"HBML+L3L", 0}, {"HBMLL+L3L", 0}, {"PerfectL2", 0}};
    case SweepAxis::kGpuCount:
      return {{"1", 1}, {"2", 2}, {"4", 4}};
  }
  return {};
}

CopaDesign WithDramMultiplier(CopaDesign d, double m) {
  if (!(m > 0)) throw ContractError("DRAM bandwidth multiplier must be positive");
  d.dram.bandwidth_per_site_gbps = IsInfinite(m) ? kInfinity : d.dram.bandwidth_per_site_gbps * m;
  d.name += fmt::format("@dram{:g}x", m);
  return d;
}

CopaDesign WithLlcCapacity(CopaDesign d, std::uint64_t capacity) {
  d.l2.capacity = capacity;
  d.l2.associativity = kFullyAssociative;
  d.name += "@llc" + FormatBytes(capacity);
  return d;
}

CopaDesign WithLinkMultiplier(CopaDesign d, double m, double reference_dram_gbps) {
  if (!(m > 0)) throw ContractError("link bandwidth multiplier must be positive");
  if (!d.msm_present || !d.uhb || !d.l3) {
    throw ContractError("link sweep needs a design with an MSM, UHB link and L3");
  }
  const double bw = IsInfinite(m) ? kInfinity : m * reference_dram_gbps;
  d.uhb->read_bandwidth_gbps = d.uhb->write_bandwidth_gbps = bw;
  d.l3->read_bandwidth_gbps = d.l3->write_bandwidth_gbps = bw;
  d.name += fmt::format("@link{:g}x", m);
  return d;
}

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
template <typename Fn>
void ParallelFor(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Cell {
  WorkloadRef workload;
  CopaDesign design;
};

// Evaluates every (workload, point) cell and normalizes each row to the
// workload's run on `base`.
SweepResult Grid(const SweepSpec& spec, Evaluator& eval, const CopaDesign& base,
                 const std::vector<std::string>& labels,
                 const std::function<Cell(const WorkloadRef&, std::size_t)>& cell_for) {
  if (labels.empty()) throw ContractError("sweep needs at least one point");
  SweepResult r;
  r.name = spec.name;
  r.axis = spec.axis;
  r.points = labels;
  const std::size_t nw = spec.suite.size(), np = labels.size();
  for (const auto& w : spec.suite) {
    r.workloads.push_back(w.name);
    r.regimes.push_back(w.regime);
  }
  r.speedup.assign(nw, std::vector<double>(np));
  r.traffic_reduction.assign(nw, std::vector<std::optional<double>>(np));
  r.dram_gb.assign(nw, std::vector<double>(np));
  r.energy_ratio.assign(nw, std::vector<std::optional<double>>(np));

  std::vector<SimResult> baseline(nw);
  ParallelFor(nw, eval.options().jobs, [&](std::size_t w) {
    baseline[w] = eval.Evaluate(spec.suite[w], base, spec.line_size);
  });
  ParallelFor(nw * np, eval.options().jobs, [&](std::size_t i) {
    const std::size_t w = i / np, p = i % np;
    const Cell cell = cell_for(spec.suite[w], p);
    const SimResult res = eval.Evaluate(cell.workload, cell.design, spec.line_size);
    r.speedup[w][p] = Speedup(baseline[w], res);
    if (cell.workload.key() == spec.suite[w].key()) {
      r.traffic_reduction[w][p] = TrafficReduction(baseline[w].traffic, res.traffic);
    }
    r.dram_gb[w][p] = static_cast<double>(res.traffic.total.dram.total()) / kGB;
    r.energy_ratio[w][p] = MemoryEnergy(res.traffic, EnergyParamsFor(cell.design)).ratio_vs_no_l3;
  });
  return r;
}

std::vector<std::string> Labels(const std::vector<AxisPoint>& points) {
  std::vector<std::string> out;
  for (const auto& p : points) out.push_back(p.label);
  return out;
}

const std::vector<AxisPoint>& PointsOf(const SweepSpec& spec, std::vector<AxisPoint>& storage) {
  if (!spec.points.empty()) return spec.points;
  storage = DefaultPoints(spec.axis);
  return storage;
}

void RequireAxis(const SweepSpec& spec, SweepAxis axis) {
  if (spec.axis != axis) {
    throw ContractError(fmt::format("sweep '{}' has axis {}, expected {}", spec.name,
                                    ToString(spec.axis), ToString(axis)));
  }
}

}  // namespace

SweepResult SweepDramBw(const SweepSpec& spec, Evaluator& eval) {
  RequireAxis(spec, SweepAxis::kDramBwMultiplier);
  std::vector<AxisPoint> storage;
  const auto& points = PointsOf(spec, storage);
  const CopaDesign target = spec.target_design.value_or(spec.base_design);
  return Grid(spec, eval, spec.base_design, Labels(points), [&](const WorkloadRef& w, std::size_t p) {
    return Cell{w, points[p].value == 1 && target == spec.base_design
                       ? spec.base_design
                       : WithDramMultiplier(target, points[p].value)};
  });
}

SweepResult SweepLlc(const SweepSpec& spec, Evaluator& eval) {
  RequireAxis(spec, SweepAxis::kLlcCapacity);
  std::vector<AxisPoint> storage;
  const auto& points = PointsOf(spec, storage);
  const CopaDesign target = spec.target_design.value_or(spec.base_design);
  // The reference is the base design's own capacity, fully associative.
  const CopaDesign base = WithLlcCapacity(spec.base_design, spec.base_design.l2.capacity);
  return Grid(spec, eval, base, Labels(points), [&](const WorkloadRef& w, std::size_t p) {
    const double v = points[p].value;
    return Cell{w, WithLlcCapacity(target, IsInfinite(v) ? kInfiniteBytes
                                                         : static_cast<std::uint64_t>(v))};
  });
}

SweepResult SweepL3LinkBw(const SweepSpec& spec, Evaluator& eval) {
  RequireAxis(spec, SweepAxis::kL3LinkBw);
  std::vector<AxisPoint> storage;
  const auto& points = PointsOf(spec, storage);
  const CopaDesign target = spec.target_design.value_or(spec.base_design);
  if (!target.l3) throw ContractError("link sweep needs a design with an L3");
  const double reference = spec.base_design.dram.total_bandwidth_gbps();
  return Grid(spec, eval, spec.base_design, Labels(points), [&](const WorkloadRef& w, std::size_t p) {
    return Cell{w, WithLinkMultiplier(target, points[p].value, reference)};
  });
}

SweepResult CompareDesigns(const SweepSpec& spec, Evaluator& eval) {
  RequireAxis(spec, SweepAxis::kNamedDesigns);
  std::vector<AxisPoint> storage;
  const auto& points = PointsOf(spec, storage);
  std::vector<CopaDesign> designs = spec.designs;
  if (designs.empty()) {
    for (const auto& p : points) designs.push_back(Preset(p.label));
  }
  if (designs.size() != points.size()) throw ContractError("one design per point required");
  return Grid(spec, eval, spec.base_design, Labels(points), [&](const WorkloadRef& w, std::size_t p) {
    return Cell{w, designs[p]};
  });
}

SweepResult ScaleOut(const SweepSpec& spec, Evaluator& eval) {
  RequireAxis(spec, SweepAxis::kGpuCount);
  std::vector<AxisPoint> storage;
  const auto& points = PointsOf(spec, storage);
  std::vector<std::string> labels = Labels(points);
  for (const auto& d : spec.designs) labels.push_back(d.name);
  for (const auto& w : spec.suite) {
    if (w.kind != WorkloadRef::Kind::kDl) {
      throw ContractError(fmt::format("scale-out needs regenerable DL workloads ({})", w.name));
    }
    for (const auto& p : points) {
      const auto n = static_cast<std::uint64_t>(p.value);
      if (n < 1 || static_cast<double>(n) != p.value) {
        throw ContractError(fmt::format("GPU count must be a positive integer ({})", p.label));
      }
      if (w.batch % n != 0) {
        std::cerr << fmt::format("warning: {}: batch {} is not divisible by {}; using {}\n",
                                 w.name, w.batch, n,
                                 std::max<std::uint64_t>(1, (w.batch + n / 2) / n));
      }
    }
  }
  return Grid(spec, eval, spec.base_design, labels, [&](const WorkloadRef& w, std::size_t p) {
    if (p >= points.size()) return Cell{w, spec.designs[p - points.size()]};
    const auto n = static_cast<std::uint64_t>(points[p].value);
    const std::uint64_t per_gpu = std::max<std::uint64_t>(1, (w.batch + n / 2) / n);
    return Cell{per_gpu == w.batch ? w : w.WithBatch(per_gpu), spec.base_design};
  });
}

SweepResult RunSweep(const SweepSpec& spec, Evaluator& eval) {
  switch (spec.axis) {
    case SweepAxis::kDramBwMultiplier: return SweepDramBw(spec, eval);
    case SweepAxis::kLlcCapacity: return SweepLlc(spec, eval);
    case SweepAxis::kL3LinkBw: return SweepL3LinkBw(spec, eval);
    case SweepAxis::kNamedDesigns: return CompareDesigns(spec, eval);
    case SweepAxis::kGpuCount: return ScaleOut(spec, eval);
  }
  throw ContractError("unknown axis");
}

// ---------------------------------------------------------------------------
// Spec documents

namespace {

using nlohmann::json;

CopaDesign ResolveDesign(const json& j, const std::string& path,
                         const std::filesystem::path& base_dir) {
  if (j.is_object()) {
    CopaDesign d = DesignFromJson(j);
    if (auto v = Validate(d); !v.empty()) throw ValidationError(v);
    return d;
  }
  if (!j.is_string()) throw ParseError(path, "expected a preset name, file path or object");
  const std::string name = j.get<std::string>();
  try {
    return Preset(name);
  } catch (const UnknownPresetError&) {
  }
  std::filesystem::path file = name;
  if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
  std::ifstream in(file);
  if (!in) throw ParseError(path, fmt::format("'{}' is neither a preset nor a readable file", name));
  std::stringstream ss;
  ss << in.rdbuf();
  return LoadDesign(ss.str());
}

double NumberOr(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<double>();
}

std::vector<WorkloadRef> ResolveSuite(const json& j, const std::string& path, std::uint64_t seed,
                                      const std::filesystem::path& base_dir) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  std::vector<WorkloadRef> out;
  auto append = [&](std::vector<WorkloadRef> v) { out.insert(out.end(), v.begin(), v.end()); };
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    const std::string epath = fmt::format("{}[{}]", path, i);
    try {
      if (e.is_string()) {
        const std::string s = e.get<std::string>();
        if (s == "dl") {
          append(DlSuite(seed));
        } else if (s == "hpc") {
          append(HpcSuite(seed));
        } else {
          append(FilterRegime(DlSuite(seed), ParseRegime(s)));
        }
      } else if (e.is_object() && e.contains("preset")) {
        const Mode mode = ParseMode(e.value("mode", "training"));
        const auto& info = DlPresetInfoFor(e["preset"].get<std::string>(), mode);
        const std::uint64_t batch = e.value("batch", info.large_batch);
        const Regime regime = e.contains("regime")
                                  ? ParseRegime(e["regime"].get<std::string>())
                                  : (mode == Mode::kTraining ? Regime::kTrainLb : Regime::kInferLb);
        WorkloadRef w = DlWorkload(info.name, mode, batch, regime, e.value("seed", seed));
        if (e.contains("name")) w.name = e["name"].get<std::string>();
        out.push_back(w);
      } else if (e.is_object() && e.contains("hpc")) {
        const json& h = e["hpc"];
        HpcParams p;
        p.working_set = h.at("working_set").is_string()
                            ? ParseBytes(h["working_set"].get<std::string>())
                            : h["working_set"].get<std::uint64_t>();
        p.reuse_fraction = NumberOr(h, "reuse_fraction", 0);
        p.flop_byte_ratio = NumberOr(h, "flop_byte_ratio", 1);
        p.kernels = h.value("kernels", 1u);
        out.push_back(HpcWorkload(e.value("name", "hpc"), p, e.value("seed", seed)));
      } else if (e.is_object() && e.contains("trace")) {
        WorkloadRef w;
        w.kind = WorkloadRef::Kind::kFile;
        std::filesystem::path file = e["trace"].get<std::string>();
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        w.path = file.string();
        w.name = e.value("name", file.stem().string());
        w.regime = ParseRegime(e.value("regime", "hpc"));
        out.push_back(w);
      } else {
        throw ParseError(epath, "expected a suite name or a workload object");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(epath, ex.what());
    }
  }
  return out;
}

AxisPoint ParsePoint(const json& j, SweepAxis axis, const std::string& path) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (axis == SweepAxis::kLlcCapacity) {
      return {FormatBytes(static_cast<std::uint64_t>(v)), v};
    }
    if (axis == SweepAxis::kL3LinkBw) return {fmt::format("{:g}+{:g}", v, v), v};
    return {fmt::format("{:g}", v), v};
  }
  if (!j.is_string()) throw ParseError(path, "expected a number or string");
  const std::string s = j.get<std::string>();
  if (axis == SweepAxis::kNamedDesigns) return {s, 0};
  if (s == "inf" || s == "perfect") return {s, kInfinity};
  try {
    if (axis == SweepAxis::kLlcCapacity) return {s, static_cast<double>(ParseBytes(s))};
    const std::string head = s.substr(0, s.find('+'));
    std::size_t used = 0;
    const double v = std::stod(head, &used);
    if (used != head.size()) throw std::invalid_argument(s);
    return {s, v};
  } catch (const std::exception&) {
    throw ParseError(path, fmt::format("cannot parse point '{}'", s));
  }
}

}  // namespace

std::vector<SweepSpec> LoadSweepSpecs(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParseError("$", "expected an object");
  const std::uint64_t seed = doc.value("seed", std::uint64_t{1});
  std::uint32_t line = 0;
  if (auto it = doc.find("line_size"); it != doc.end() && !it->is_string()) {
    line = it->get<std::uint32_t>();
    if (!IsPowerOfTwo(line)) throw ParseError("line_size", "must be a power of two");
  }
  auto sweeps = doc.find("sweeps");
  if (sweeps == doc.end() || !sweeps->is_array() || sweeps->empty()) {
    throw ParseError("sweeps", "expected a non-empty array");
  }
  std::vector<SweepSpec> out;
  for (std::size_t i = 0; i < sweeps->size(); ++i) {
    const json& s = (*sweeps)[i];
    const std::string path = fmt::format("sweeps[{}]", i);
    SweepSpec spec;
    spec.line_size = line;
    try {
      spec.axis = ParseAxis(s.at("axis").get<std::string>());
    } catch (const std::exception& e) {
      throw ParseError(path + ".axis", e.what());
    }
    spec.name = s.value("name", std::string(ToString(spec.axis)));
    spec.suite = ResolveSuite(s.value("suite", json::array({"dl"})), path + ".suite",
                              s.value("seed", seed), base_dir);
    if (spec.suite.empty()) throw ParseError(path + ".suite", "suite is empty");
    spec.base_design = ResolveDesign(s.value("base_design", json("GPU-N")),
                                     path + ".base_design", base_dir);
    if (s.contains("target_design")) {
      spec.target_design = ResolveDesign(s["target_design"], path + ".target_design", base_dir);
    }
    if (auto pts = s.find("points"); pts != s.end()) {
      if (!pts->is_array() || pts->empty()) throw ParseError(path + ".points", "expected a non-empty array");
      for (std::size_t k = 0; k < pts->size(); ++k) {
        spec.points.push_back(
            ParsePoint((*pts)[k], spec.axis, fmt::format("{}.points[{}]", path, k)));
      }
    } else {
      spec.points = DefaultPoints(spec.axis);
    }
    if (spec.axis == SweepAxis::kNamedDesigns) {
      for (std::size_t k = 0; k < spec.points.size(); ++k) {
        spec.designs.push_back(ResolveDesign(json(spec.points[k].label),
                                             fmt::format("{}.points[{}]", path, k), base_dir));
      }
    }
    if (spec.axis == SweepAxis::kGpuCount && s.contains("designs")) {
      const json& ds = s["designs"];
      for (std::size_t k = 0; k < ds.size(); ++k) {
        spec.designs.push_back(ResolveDesign(ds[k], fmt::format("{}.designs[{}]", path, k), base_dir));
      }
    }
    for (const auto& p : spec.points) {
      if (spec.axis != SweepAxis::kNamedDesigns && !(p.value > 0)) {
        throw ParseError(path + ".points", fmt::format("point '{}' must be positive", p.label));
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string Opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

void WriteSweepCsv(const SweepResult& r, std::ostream& out) {
  out << "workload,regime,axis_value,speedup,traffic_reduction,dram_gb,energy_ratio\n";
  for (std::size_t p = 0; p < r.points.size(); ++p) {
    for (std::size_t w = 0; w < r.workloads.size(); ++w) {
      out << fmt::format("{},{},{},{:.6f},{},{:.6f},{}\n", r.workloads[w], ToString(r.regimes[w]),
                         r.points[p], r.speedup[w][p], Opt(r.traffic_reduction[w][p]),
                         r.dram_gb[w][p], Opt(r.energy_ratio[w][p]));
    }
  }
}

nlohmann::json SweepSummary(const SweepResult& r) {
  auto round6 = [](double v) { return std::isnan(v) ? json(nullptr) : json(std::round(v * 1e6) / 1e6); };
  auto row = [&](const std::vector<double>& g) {
    json a = json::array();
    for (double v : g) a.push_back(round6(v));
    return a;
  };
  json geo = json::object();
  geo["all"] = row(r.Geomean());
  for (Regime reg : {Regime::kTrainLb, Regime::kTrainSb, Regime::kInferLb, Regime::kInferSb,
                     Regime::kHpc}) {
    if (std::find(r.regimes.begin(), r.regimes.end(), reg) != r.regimes.end()) {
      geo[std::string(ToString(reg))] = row(r.Geomean({reg}));
    }
  }
  if (std::find(r.regimes.begin(), r.regimes.end(), Regime::kTrainLb) != r.regimes.end() ||
      std::find(r.regimes.begin(), r.regimes.end(), Regime::kInferLb) != r.regimes.end()) {
    geo["dl_lb"] = row(r.Geomean({Regime::kTrainLb, Regime::kInferLb}));
  }
  return {{"name", r.name},
          {"axis", ToString(r.axis)},
          {"points", r.points},
          {"workloads", r.workloads.size()},
          {"geomean_speedup", geo}};
}

std::vector<std::filesystem::path> WriteSweepOutputs(const std::vector<SweepResult>& results,
                                                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  json summary = {{"sweeps", json::array()}};
  for (const auto& r : results) {
    const auto file = dir / (r.name + ".csv");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    WriteSweepCsv(r, out);
    files.push_back(file);
    summary["sweeps"].push_back(SweepSummary(r));
  }
  const auto file = dir / "summary.json";
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << summary.dump(2) << '\n';
  files.push_back(file);
  return files;
}

}  // namespace copa

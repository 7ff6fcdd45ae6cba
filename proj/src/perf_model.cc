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

#include "copa/perf_model.h"

#include <algorithm>
#include <array>

#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

std::string_view ToString(Limiter l) {
  switch (l) {
    case Limiter::kMath: return "math";
    case Limiter::kL2: return "l2";
    case Limiter::kLink: return "link";
    case Limiter::kL3: return "l3";
    case Limiter::kDram: return "dram";
    case Limiter::kLatency: return "latency";
    case Limiter::kLaunch: return "launch";
  }
  return "?";
}

namespace {

// bytes / (GB/s). Infinite bandwidth moves anything in zero time.
double Transfer(double bytes, double gbps, std::string_view what) {
  if (bytes == 0 || IsInfinite(gbps)) return 0;
  if (!(gbps > 0)) {
    throw ContractError(fmt::format("{} bytes must cross {} with zero bandwidth", bytes, what));
  }
  return bytes / (gbps * kGB);
}

}  // namespace

KernelTiming KernelTime(const KernelDescriptor& kernel, const TrafficCounts& traffic,
                        const CopaDesign& design, const PerfParams& params,
                        const Idealization& ideal) {
  KernelTiming t;
  const double line = design.l2.line_size;
  const double capacity = design.core.sm_count * params.work_units_per_sm;
  const double u =
      ideal.full_utilization ? 1.0
                             : std::min(1.0, static_cast<double>(kernel.parallelism) / capacity);
  const std::array<double, 2> peak = {design.core.peak_fp16_tflops, design.core.peak_fp32_tflops};
  for (int p = 0; p < 2; ++p) {
    if (kernel.flops[p] == 0) continue;
    if (!(peak[p] > 0)) throw ContractError("flops issued at a precision with zero peak");
    t.t_math += kernel.flops[p] / (peak[p] * kTB * u);
  }

  if (!ideal.ideal_memory) {
    t.t_l2 = std::max(
        Transfer(traffic.l2.read_accesses * line, design.l2.read_bandwidth_gbps, "L2 reads"),
        Transfer(traffic.l2.write_accesses * line, design.l2.write_bandwidth_gbps, "L2 writes"));
    if (design.msm_present && design.uhb) {
      t.t_link_read = Transfer(static_cast<double>(traffic.link.read_bytes),
                               design.uhb->read_bandwidth_gbps, "UHB link reads");
      t.t_link_write = Transfer(static_cast<double>(traffic.link.write_bytes),
                                design.uhb->write_bandwidth_gbps, "UHB link writes");
    }
    if (design.msm_present && design.l3 && design.l3->capacity > 0) {
      const double fills = static_cast<double>(traffic.l2.writebacks + traffic.l3.misses);
      t.t_l3 = std::max(
          Transfer(traffic.l3.accesses * line, design.l3->read_bandwidth_gbps, "L3 reads"),
          Transfer(fills * line, design.l3->write_bandwidth_gbps, "L3 writes"));
    }

    // Little's law over the requests that leave the L2.
    if (!design.l2.infinite_capacity() && traffic.l2_out.read_bytes > 0) {
      const double requests = static_cast<double>(traffic.l2_out.read_bytes) / params.request_bytes;
      double latency_ns = design.dram.access_latency_ns;
      if (design.msm_present && traffic.l3.accesses > 0) {
        const double l3_rt = (design.uhb ? design.uhb->round_trip_latency_ns : 0.0) +
                             (design.l3 ? design.l3->access_latency_ns : 0.0);
        const double hit = static_cast<double>(traffic.l3.hits) / traffic.l3.accesses;
        latency_ns = hit * l3_rt + (1 - hit) * design.dram.access_latency_ns;
      }
      const double concurrency = design.core.sm_count * params.outstanding_requests_per_sm;
      t.t_latency_floor = requests * latency_ns * 1e-9 / concurrency;
    }
  }
  if (!ideal.infinite_dram_bandwidth) {
    t.t_dram = Transfer(static_cast<double>(traffic.dram.total()),
                        design.dram.total_bandwidth_gbps(), "DRAM");
  }
  t.t_launch = ideal.full_utilization ? 0.0 : design.core.kernel_launch_overhead_us * 1e-6;

  const std::array<std::pair<double, Limiter>, 7> parts = {{
      {t.t_math, Limiter::kMath},
      {t.t_l2, Limiter::kL2},
      {t.t_link_read, Limiter::kLink},
      {t.t_link_write, Limiter::kLink},
      {t.t_l3, Limiter::kL3},
      {t.t_dram, Limiter::kDram},
      {t.t_latency_floor, Limiter::kLatency},
  }};
  double longest = 0;
  for (const auto& [time, limiter] : parts) {
    if (time > longest) {
      longest = time;
      t.limiter = limiter;
    }
  }
  t.t_total = longest + t.t_launch;
  return t;
}

SimResult TimeTrace(const Trace& trace, const TrafficReport& traffic, const CopaDesign& design,
                    const PerfParams& params, const Idealization& ideal) {
  if (traffic.kernels.size() != trace.kernels.size()) {
    throw ContractError("traffic report does not match the trace");
  }
  SimResult r;
  r.traffic = traffic;
  r.kernels.reserve(trace.kernels.size());
  for (std::size_t k = 0; k < trace.kernels.size(); ++k) {
    r.kernels.push_back(KernelTime(trace.kernels[k], traffic.kernels[k], design, params, ideal));
    r.total_seconds += r.kernels.back().t_total;
  }
  if (r.total_seconds > 0) {
    const auto& t = traffic.total;
    const double l2_bytes = static_cast<double>(t.l2.accesses) * traffic.line_size;
    r.l2_gbps = l2_bytes / r.total_seconds / kGB;
    r.link_gbps = static_cast<double>(t.link.total()) / r.total_seconds / kGB;
    r.dram_gbps = static_cast<double>(t.dram.total()) / r.total_seconds / kGB;
  }
  return r;
}

SimResult Run(const Trace& trace, const CopaDesign& design, const PerfParams& params,
              const SimOptions& options) {
  return TimeTrace(trace, Simulate(trace, design, options), design, params);
}

TimeBreakdown Attribute(const Trace& trace, const TrafficReport& traffic,
                        const CopaDesign& design, const PerfParams& params) {
  Idealization ideal;
  const double r0 = TimeTrace(trace, traffic, design, params, ideal).total_seconds;
  ideal.infinite_dram_bandwidth = true;
  const double r1 = TimeTrace(trace, traffic, design, params, ideal).total_seconds;
  ideal.ideal_memory = true;
  const double r2 = TimeTrace(trace, traffic, design, params, ideal).total_seconds;
  ideal.full_utilization = true;
  const double r3 = TimeTrace(trace, traffic, design, params, ideal).total_seconds;

  TimeBreakdown b;
  b.total = r0;
  b.dram_bw = r0 - r1;
  b.mem_other = r1 - r2;
  b.sm_idle = r2 - r3;
  b.math = r3;
  return b;
}

TimeBreakdown Attribute(const Trace& trace, const CopaDesign& design, const PerfParams& params) {
  return Attribute(trace, Simulate(trace, design), design, params);
}

double Speedup(double a_seconds, double b_seconds) {
  if (!(b_seconds > 0)) throw ContractError("speedup against a zero runtime");
  return a_seconds / b_seconds;
}

double Speedup(const SimResult& a, const SimResult& b) {
  return Speedup(a.total_seconds, b.total_seconds);
}

nlohmann::json ToJson(const KernelTiming& t) {
  return {{"t_math", t.t_math},
          {"t_l2", t.t_l2},
          {"t_link_read", t.t_link_read},
          {"t_link_write", t.t_link_write},
          {"t_l3", t.t_l3},
          {"t_dram", t.t_dram},
          {"t_latency_floor", t.t_latency_floor},
          {"t_launch", t.t_launch},
          {"t_total", t.t_total},
          {"limiter", ToString(t.limiter)}};
}

nlohmann::json ToJson(const SimResult& r, bool per_kernel) {
  nlohmann::json limiters = nlohmann::json::object();
  for (const auto& k : r.kernels) {
    auto& slot = limiters[std::string(ToString(k.limiter))];
    slot = slot.is_null() ? 1 : slot.get<int>() + 1;
  }
  nlohmann::json j = {{"total_seconds", r.total_seconds},
                      {"achieved_gbps", {{"l2", r.l2_gbps}, {"link", r.link_gbps},
                                         {"dram", r.dram_gbps}}},
                      {"limiter_counts", limiters},
                      {"traffic", ToJson(r.traffic, per_kernel)}};
  if (per_kernel) {
    auto& arr = j["kernels"] = nlohmann::json::array();
    for (const auto& k : r.kernels) arr.push_back(ToJson(k));
  }
  return j;
}

nlohmann::json ToJson(const TimeBreakdown& b) {
  return {{"math", b.math},
          {"sm_idle", b.sm_idle},
          {"mem_other", b.mem_other},
          {"dram_bw", b.dram_bw},
          {"total", b.total}};
}

}  // namespace copa

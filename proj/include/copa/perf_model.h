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

#ifndef COPA_PERF_MODEL_H_
#define COPA_PERF_MODEL_H_

// Limiter timing model. Each kernel takes as long as its slowest resource
// (math, L2, UHB link, L3, DRAM, or a latency floor) plus launch overhead;
// kernels run back to back.

#include <string_view>
#include <vector>

#include "copa/arch_config.h"
#include "copa/cache_sim.h"
#include "copa/workload_gen.h"
#include "json.hpp"

namespace copa {

enum class Limiter { kMath, kL2, kLink, kL3, kDram, kLatency, kLaunch };
std::string_view ToString(Limiter l);

struct PerfParams {
  // Concurrent work units (thread blocks) per SM before utilization is full.
  double work_units_per_sm = 32;
  // Outstanding memory requests per SM that hide miss latency.
  double outstanding_requests_per_sm = 256;
  // Size of one memory request; latency is charged per request.
  double request_bytes = 128;

  bool operator==(const PerfParams&) const = default;
};

// Selective idealizations used for bottleneck attribution.
struct Idealization {
  bool infinite_dram_bandwidth = false;
  bool ideal_memory = false;        // L2/L3/link bandwidth infinite, no latency floor
  bool full_utilization = false;    // u = 1 and no launch overhead
};

struct KernelTiming {
  double t_math = 0;
  double t_l2 = 0;
  double t_link_read = 0;
  double t_link_write = 0;
  double t_l3 = 0;
  double t_dram = 0;
  double t_latency_floor = 0;
  double t_launch = 0;
  double t_total = 0;
  Limiter limiter = Limiter::kLaunch;
};

struct SimResult {
  std::vector<KernelTiming> kernels;
  double total_seconds = 0;
  TrafficReport traffic;
  double l2_gbps = 0;  // achieved, averaged over the run
  double link_gbps = 0;
  double dram_gbps = 0;
};

struct TimeBreakdown {
  double math = 0;
  double sm_idle = 0;
  double mem_other = 0;
  double dram_bw = 0;
  double total = 0;  // baseline runtime
};

// Throws ContractError when bytes must cross a zero-bandwidth resource.
KernelTiming KernelTime(const KernelDescriptor& kernel, const TrafficCounts& traffic,
                        const CopaDesign& design, const PerfParams& params = {},
                        const Idealization& ideal = {});

// Times every kernel of `trace` against precomputed traffic.
SimResult TimeTrace(const Trace& trace, const TrafficReport& traffic, const CopaDesign& design,
                    const PerfParams& params = {}, const Idealization& ideal = {});

SimResult Run(const Trace& trace, const CopaDesign& design, const PerfParams& params = {},
              const SimOptions& options = {});

// Four runs sharing one traffic simulation: baseline, infinite DRAM
// bandwidth, ideal memory, full utilization.
TimeBreakdown Attribute(const Trace& trace, const TrafficReport& traffic,
                        const CopaDesign& design, const PerfParams& params = {});
TimeBreakdown Attribute(const Trace& trace, const CopaDesign& design,
                        const PerfParams& params = {});

// a.total / b.total.
double Speedup(const SimResult& a, const SimResult& b);
double Speedup(double a_seconds, double b_seconds);

nlohmann::json ToJson(const KernelTiming& t);
nlohmann::json ToJson(const SimResult& r, bool per_kernel = false);
nlohmann::json ToJson(const TimeBreakdown& b);

}  // namespace copa

#endif  // COPA_PERF_MODEL_H_

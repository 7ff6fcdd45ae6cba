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


#include <gtest/gtest.h>

#include <cmath>

#include "copa/cache_sim.h"
#include "copa/errors.h"
#include "copa/perf_model.h"
#include "copa/sweep_harness.h"
#include "copa/units.h"
#include "copa/workload_gen.h"

namespace copa {
namespace {

KernelDescriptor Kernel(double fp16_flops, std::uint64_t parallelism = 1u << 30) {
  KernelDescriptor k;
  k.name = "k";
  k.flops[0] = fp16_flops;
  k.parallelism = parallelism;
  return k;
}

TrafficCounts DramOnly(std::uint64_t read_bytes) {
  TrafficCounts c;
  c.dram.read_bytes = read_bytes;
  return c;
}

double RelErr(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(KernelTime, PureMath) {
  const auto t = KernelTime(Kernel(779e12), {}, Preset("GPU-N"));
  EXPECT_NEAR(t.t_math, 1.0, 1e-12);
  EXPECT_EQ(t.limiter, Limiter::kMath);
  EXPECT_NEAR(t.t_total, 1.0 + 2e-6, 1e-12);
}

TEST(KernelTime, PureDram) {
  const CopaDesign d = Preset("GPU-N");
  const double bytes = d.dram.total_bandwidth_gbps() * kGB;
  const auto t = KernelTime(Kernel(0), DramOnly(static_cast<std::uint64_t>(bytes)), d);
  EXPECT_NEAR(t.t_dram, 1.0, 1e-9);
  EXPECT_EQ(t.limiter, Limiter::kDram);
}

TEST(KernelTime, MaxRule) {
  const CopaDesign d = Preset("GPU-N");
  const auto half = static_cast<std::uint64_t>(d.dram.total_bandwidth_gbps() * kGB / 2);
  const auto t = KernelTime(Kernel(779e12), DramOnly(half), d);
  EXPECT_NEAR(t.t_dram, 0.5, 1e-9);
  EXPECT_NEAR(t.t_total, 1.0 + d.core.kernel_launch_overhead_us * 1e-6, 1e-9);
  EXPECT_EQ(t.limiter, Limiter::kMath);
}

TEST(KernelTime, UnderfilledKernelRunsSlower) {
  const CopaDesign d = Preset("GPU-N");
  const std::uint64_t full = static_cast<std::uint64_t>(d.core.sm_count) * 32;
  const auto t = KernelTime(Kernel(779e12, full / 4), {}, d);
  EXPECT_NEAR(t.t_math, 4.0, 1e-9);
  Idealization ideal;
  ideal.full_utilization = true;
  EXPECT_NEAR(KernelTime(Kernel(779e12, full / 4), {}, d, {}, ideal).t_math, 1.0, 1e-12);
}

TEST(KernelTime, ZeroBandwidthIsContractError) {
  CopaDesign d = Preset("GPU-N");
  d.dram.bandwidth_per_site_gbps = 0;
  EXPECT_THROW(KernelTime(Kernel(0), DramOnly(128), d), ContractError);
  EXPECT_NO_THROW(KernelTime(Kernel(0), {}, d));
  d.dram.bandwidth_per_site_gbps = kInfinity;
  EXPECT_EQ(KernelTime(Kernel(0), DramOnly(128), d).t_dram, 0.0);
}

TEST(KernelTime, LatencyFloorFollowsLittlesLaw) {
  const CopaDesign d = Preset("GPU-N");
  TrafficCounts c;
  c.l2_out.read_bytes = 128'000'000;
  const PerfParams p;
  const double expect = 1e6 * d.dram.access_latency_ns * 1e-9 /
                        (d.core.sm_count * p.outstanding_requests_per_sm);
  EXPECT_NEAR(KernelTime(Kernel(0), c, d, p).t_latency_floor, expect, 1e-15);
  Idealization ideal;
  ideal.ideal_memory = true;
  EXPECT_EQ(KernelTime(Kernel(0), c, d, p, ideal).t_latency_floor, 0.0);
}

TEST(TimeTrace, EmptyTraceTakesNoTime) {
  const Trace t;
  EXPECT_EQ(copa::Run(t, Preset("GPU-N")).total_seconds, 0.0);
}

TEST(TimeTrace, MismatchedTrafficRejected) {
  const Trace t = GenHpcTrace(kMiB, 0.5, 1, 2, 1);
  EXPECT_THROW(TimeTrace(t, TrafficReport{}, Preset("GPU-N")), ContractError);
}

TEST(Speedup, Basics) {
  EXPECT_EQ(Speedup(3.0, 3.0), 1.0);
  EXPECT_EQ(Speedup(2.0, 1.0), 2.0);
  EXPECT_THROW(Speedup(1.0, 0.0), ContractError);
}

TEST(Attribute, ComputeBoundHasNoMemorySegments) {
  Trace t;
  t.kernels.push_back(Kernel(779e12));
  t.kernels[0].accesses.push_back({0, 0, 4096, Direction::kRead, {}, 1});
  FinalizeTrace(t);
  const auto b = Attribute(t, Preset("GPU-N"));
  EXPECT_EQ(b.dram_bw, 0.0);
  EXPECT_EQ(b.mem_other, 0.0);
  EXPECT_NEAR(b.math + b.sm_idle, b.total, 1e-15);
}

TEST(Attribute, InfiniteDramHasNoDramSegment) {
  CopaDesign d = Preset("GPU-N");
  d.dram.bandwidth_per_site_gbps = kInfinity;
  const Trace t = GenHpcTrace(256 * kMiB, 0.1, 0.5, 4, 1, 4096);
  EXPECT_EQ(Attribute(t, WithLineSize(d, 4096)).dram_bw, 0.0);
}

class SuiteAttribution : public ::testing::Test {
 protected:
  static Evaluator& Eval() {
    static Evaluator e;
    return e;
  }
};

TEST_F(SuiteAttribution, SegmentsSumToRuntime) {
  for (const auto& w : FilterRegime(DlSuite(), Regime::kInferSb)) {
    for (const char* name : {"GPU-N", "HBML+L3", "PerfectL2"}) {
      const auto b = Eval().Attribution(w, Preset(name));
      EXPECT_LE(RelErr(b.math + b.sm_idle + b.mem_other + b.dram_bw, b.total), 1e-9)
          << w.name << " " << name;
      EXPECT_GE(b.dram_bw, 0.0);
      EXPECT_GE(b.mem_other, 0.0);
      EXPECT_GE(b.sm_idle, 0.0);
    }
  }
}

TEST_F(SuiteAttribution, PerfectL2IsMathLaunchAndIdleOnly) {
  for (const auto& w : FilterRegime(DlSuite(), Regime::kTrainLb)) {
    const auto b = Eval().Attribution(w, Preset("PerfectL2"));
    EXPECT_EQ(b.dram_bw, 0.0) << w.name;
    EXPECT_EQ(b.mem_other, 0.0) << w.name;
    const auto trace = Eval().GetTrace(w);
    double math = 0;
    const CopaDesign d = Preset("PerfectL2");
    for (const auto& k : trace->kernels) {
      math += k.flops_at(Precision::kFp16) / (d.core.peak_fp16_tflops * kTB) +
              k.flops_at(Precision::kFp32) / (d.core.peak_fp32_tflops * kTB);
    }
    EXPECT_LE(RelErr(b.math, math), 1e-9) << w.name;
  }
}

TEST_F(SuiteAttribution, DramIsTheLargestStallOnGpuN) {
  double dram = 0, other = 0, idle = 0;
  for (const auto& w : FilterRegime(DlSuite(), Regime::kTrainLb)) {
    const auto b = Eval().Attribution(w, Preset("GPU-N"));
    dram += b.dram_bw;
    other += b.mem_other;
    idle += b.sm_idle;
  }
  EXPECT_GT(dram, other);
  EXPECT_GT(dram, idle);
}

TEST(SimResultJson, CarriesLimiterCounts) {
  const Trace t = GenHpcTrace(8 * kMiB, 0.5, 1, 3, 1);
  const auto j = ToJson(copa::Run(t, Preset("GPU-N")), true);
  EXPECT_EQ(j["kernels"].size(), 3u);
  int n = 0;
  for (const auto& item : j["limiter_counts"].items()) n += item.value().get<int>();
  EXPECT_EQ(n, 3);
}

}  // namespace
}  // namespace copa

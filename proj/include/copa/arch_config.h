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

#ifndef COPA_ARCH_CONFIG_H_
#define COPA_ARCH_CONFIG_H_

// Architecture descriptions for monolithic and composable GPUs: compute core,
// L2, optional memory-side L3 behind an on-package UHB link, and HBM.
//
// Units: bandwidths in GB/s (decimal), latencies in ns, cache capacities in
// bytes (binary prefixes), DRAM capacity in GB. Infinite bandwidths are
// +infinity; infinite capacities are kInfiniteBytes.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "copa/units.h"
#include "json.hpp"

namespace copa {

enum class Integration { kMonolithic, kStacked3d, kPlanar2p5d };
enum class DramAttach { kOnGpm, kOnMsm };

std::string_view ToString(Integration v);
std::string_view ToString(DramAttach v);

struct GpuCoreConfig {
  int sm_count = 0;
  double frequency_ghz = 0;
  double peak_fp32_tflops = 0;
  double peak_fp16_tflops = 0;
  double kernel_launch_overhead_us = 2.0;

  bool operator==(const GpuCoreConfig&) const = default;
};

// Associativity value meaning "one set holding every line".
inline constexpr std::uint32_t kFullyAssociative = 0;

struct CacheLevelSpec {
  std::uint64_t capacity = 0;  // 0 disables the level (pass-through)
  std::uint32_t line_size = 128;
  std::uint32_t associativity = 16;
  double read_bandwidth_gbps = 0;
  double write_bandwidth_gbps = 0;
  double access_latency_ns = 0;

  bool fully_associative() const { return associativity == kFullyAssociative; }
  bool infinite_capacity() const { return IsInfinite(capacity); }
  std::uint64_t num_lines() const { return capacity / line_size; }
  std::uint64_t num_sets() const;

  bool operator==(const CacheLevelSpec&) const = default;
};

struct UhbLinkSpec {
  double read_bandwidth_gbps = 0;
  double write_bandwidth_gbps = 0;
  double round_trip_latency_ns = 0;
  double energy_per_bit_pj = 0;
  double toggle_rate = 0.25;

  double total_bandwidth_gbps() const {
    return read_bandwidth_gbps + write_bandwidth_gbps;
  }
  bool operator==(const UhbLinkSpec&) const = default;
};

struct DramSpec {
  int hbm_sites = 0;
  double bandwidth_per_site_gbps = 0;
  double capacity_per_site_gb = 0;
  double access_latency_ns = 360.0;

  double total_bandwidth_gbps() const { return hbm_sites * bandwidth_per_site_gbps; }
  double total_capacity_gb() const { return hbm_sites * capacity_per_site_gb; }
  bool operator==(const DramSpec&) const = default;
};

struct CopaDesign {
  std::string name;
  Integration integration = Integration::kMonolithic;
  GpuCoreConfig core;
  CacheLevelSpec l2;
  bool msm_present = false;
  std::optional<CacheLevelSpec> l3;
  std::optional<UhbLinkSpec> uhb;
  DramSpec dram;
  DramAttach dram_attach = DramAttach::kOnGpm;

  bool operator==(const CopaDesign&) const = default;
};

// Single-MSM and dual-MSM L3 ceilings and per-style HBM site limits.
inline constexpr std::uint64_t kMaxL3Stacked3d = 960 * kMiB;
inline constexpr std::uint64_t kMaxL3Planar2p5d = 1920 * kMiB;
inline constexpr int kMaxHbmSitesStacked3d = 6;
inline constexpr int kMaxHbmSitesPlanar2p5d = 14;

// Named configurations: V100, A100, GPU-N, HBM+L3, HBML+L3, HBM+L3L,
// HBML+L3L, HBMLL+L3L, PerfectL2. Throws UnknownPresetError otherwise.
CopaDesign Preset(std::string_view name);
const std::vector<std::string>& PresetNames();

// Every violated invariant, in a stable order. Empty means valid.
std::vector<std::string> Validate(const CopaDesign& design);

// JSON design documents. LoadDesign throws ParseError (schema) or
// ValidationError (invariants).
CopaDesign LoadDesign(std::string_view document);
std::string SerializeDesign(const CopaDesign& design);
nlohmann::json DesignToJson(const CopaDesign& design);
CopaDesign DesignFromJson(const nlohmann::json& doc);  // no validation

// Same design with every cache level re-lined to `line_size`. Used to run
// coarse-grained traces against table presets.
CopaDesign WithLineSize(CopaDesign design, std::uint32_t line_size);

}  // namespace copa

#endif  // COPA_ARCH_CONFIG_H_

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

#include "copa/arch_config.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

using nlohmann::json;

std::string_view ToString(Integration v) {
  switch (v) {
    case Integration::kMonolithic: return "monolithic";
    case Integration::kStacked3d: return "stacked_3d";
    case Integration::kPlanar2p5d: return "planar_2p5d";
  }
  return "?";
}

std::string_view ToString(DramAttach v) {
  return v == DramAttach::kOnGpm ? "on_gpm" : "on_msm";
}

std::uint64_t CacheLevelSpec::num_sets() const {
  if (infinite_capacity() || capacity == 0) return 0;
  if (fully_associative()) return 1;
  return capacity / (static_cast<std::uint64_t>(line_size) * associativity);
}

namespace {

// GPU-N derives its per-site HBM figures from a 6-site baseline.
constexpr int kGpuNSites = 6;
constexpr double kGpuNDramGBps = 2687.0;
constexpr double kGpuNDramGB = 100.0;

// The L2 bandwidth is not part of the published tables. It is set to roughly
// 3x the GPU-N DRAM bandwidth, the point past which extra DRAM bandwidth gives
// diminishing returns.
constexpr double kGpuNL2GBps = 8100.0;

constexpr double kDramLatencyNs = 360.0;
// UHB traversal plus L3 array access: half the DRAM latency.
constexpr double kUhbRoundTripNs = 60.0;
constexpr double kL3AccessNs = 120.0;

CacheLevelSpec L2Spec(std::uint64_t mib, double gbps) {
  CacheLevelSpec s;
  s.capacity = mib * kMiB;
  s.read_bandwidth_gbps = gbps;
  s.write_bandwidth_gbps = gbps;
  s.access_latency_ns = 100.0;
  return s;
}

CopaDesign Monolithic(std::string name, GpuCoreConfig core, std::uint64_t l2_mib,
                      double l2_gbps, int sites, double dram_gbps, double dram_gb) {
  CopaDesign d;
  d.name = std::move(name);
  d.integration = Integration::kMonolithic;
  d.core = core;
  d.l2 = L2Spec(l2_mib, l2_gbps);
  d.dram.hbm_sites = sites;
  d.dram.bandwidth_per_site_gbps = dram_gbps / sites;
  d.dram.capacity_per_site_gb = dram_gb / sites;
  d.dram.access_latency_ns = kDramLatencyNs;
  return d;
}

CopaDesign GpuN() {
  return Monolithic("GPU-N", {134, 1.4, 24.2, 779.0, 2.0}, 60, kGpuNL2GBps, kGpuNSites,
                    kGpuNDramGBps, kGpuNDramGB);
}

// GPU-N's GPM with an MSM carrying `l3_mib` of L3 and `sites` HBM sites.
CopaDesign WithMsm(std::string name, Integration integration, std::uint64_t l3_mib,
                   int sites) {
  CopaDesign d = GpuN();
  d.name = std::move(name);
  d.integration = integration;
  d.msm_present = true;
  d.dram_attach = DramAttach::kOnMsm;
  d.dram.hbm_sites = sites;

  // 2xRD + 2xWR of the baseline DRAM bandwidth.
  const double link_gbps = 2.0 * kGpuNDramGBps;
  UhbLinkSpec link;
  link.read_bandwidth_gbps = link_gbps;
  link.write_bandwidth_gbps = link_gbps;
  link.round_trip_latency_ns = kUhbRoundTripNs;
  link.energy_per_bit_pj = integration == Integration::kStacked3d ? 0.05 : 0.3;
  link.toggle_rate = 0.25;
  d.uhb = link;

  CacheLevelSpec l3;
  l3.capacity = l3_mib * kMiB;
  l3.read_bandwidth_gbps = link_gbps;
  l3.write_bandwidth_gbps = link_gbps;
  l3.access_latency_ns = kL3AccessNs;
  d.l3 = l3;
  return d;
}

CopaDesign PerfectL2() {
  CopaDesign d = GpuN();
  d.name = "PerfectL2";
  d.l2.capacity = kInfiniteBytes;
  d.l2.read_bandwidth_gbps = kInfinity;
  d.l2.write_bandwidth_gbps = kInfinity;
  d.dram.bandwidth_per_site_gbps = kInfinity;
  d.dram.capacity_per_site_gb = kInfinity;
  return d;
}

const std::map<std::string, std::function<CopaDesign()>, std::less<>>& Registry() {
  static const auto* registry = new std::map<std::string, std::function<CopaDesign()>,
                                             std::less<>>{
      {"V100",
       [] {
         return Monolithic("V100", {80, 1.4, 15.7, 125.0, 2.0}, 6, 2500.0, 4, 900.0, 16.0);
       }},
      {"A100",
       [] {
         return Monolithic("A100", {108, 1.4, 19.5, 312.0, 2.0}, 40, 5000.0, 5, 1555.0,
                           40.0);
       }},
      {"GPU-N", GpuN},
      {"HBM+L3", [] { return WithMsm("HBM+L3", Integration::kStacked3d, 960, 6); }},
      {"HBML+L3", [] { return WithMsm("HBML+L3", Integration::kPlanar2p5d, 960, 10); }},
      {"HBM+L3L", [] { return WithMsm("HBM+L3L", Integration::kPlanar2p5d, 1920, 6); }},
      {"HBML+L3L", [] { return WithMsm("HBML+L3L", Integration::kPlanar2p5d, 1920, 10); }},
      {"HBMLL+L3L",
       [] { return WithMsm("HBMLL+L3L", Integration::kPlanar2p5d, 1920, 14); }},
      {"PerfectL2", PerfectL2},
  };
  return *registry;
}

bool Positive(double v) { return v > 0; }  // +inf counts as positive

void ValidateCache(const CacheLevelSpec& c, std::string_view level,
                   std::vector<std::string>& out) {
  if (!IsPowerOfTwo(c.line_size)) {
    out.push_back(fmt::format("{}: line_size {} is not a power of two", level, c.line_size));
  } else if (!c.infinite_capacity() && c.capacity != 0) {
    const std::uint64_t granule =
        static_cast<std::uint64_t>(c.line_size) *
        (c.fully_associative() ? 1u : c.associativity);
    if (c.capacity % granule != 0) {
      out.push_back(fmt::format(
          "{}: capacity {} is not a multiple of line_size x associativity ({} bytes)", level,
          FormatBytes(c.capacity), granule));
    }
  }
  if (!Positive(c.read_bandwidth_gbps) || !Positive(c.write_bandwidth_gbps)) {
    out.push_back(fmt::format("{}: bandwidths must be positive", level));
  }
  if (c.access_latency_ns < 0) {
    out.push_back(fmt::format("{}: access_latency must be non-negative", level));
  }
}

}  // namespace

const std::vector<std::string>& PresetNames() {
  static const std::vector<std::string> names = {
      "V100", "A100", "GPU-N", "HBM+L3", "HBML+L3", "HBM+L3L", "HBML+L3L", "HBMLL+L3L",
      "PerfectL2"};
  return names;
}

CopaDesign Preset(std::string_view name) {
  const auto& registry = Registry();
  if (auto it = registry.find(name); it != registry.end()) return it->second();
  std::string valid;
  for (const auto& n : PresetNames()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownPresetError(
      fmt::format("no such preset '{}' (valid presets: {})", name, valid));
}

std::vector<std::string> Validate(const CopaDesign& d) {
  std::vector<std::string> out;

  const auto& c = d.core;
  if (c.sm_count <= 0) out.push_back("core: sm_count must be positive");
  if (!(c.frequency_ghz > 0)) out.push_back("core: frequency must be positive");
  if (!(c.peak_fp32_tflops > 0)) out.push_back("core: peak_fp32 must be positive");
  if (c.peak_fp16_tflops < c.peak_fp32_tflops) {
    out.push_back("core: peak_fp16 must be at least peak_fp32");
  }
  if (c.kernel_launch_overhead_us < 0) {
    out.push_back("core: kernel_launch_overhead must be non-negative");
  }

  ValidateCache(d.l2, "l2", out);
  if (d.l2.capacity == 0) out.push_back("l2: capacity must be positive");
  if (d.l3) {
    ValidateCache(*d.l3, "l3", out);
    if (d.l3->line_size != d.l2.line_size) {
      out.push_back("l3: line_size must match the L2 line_size");
    }
  }

  if (d.uhb) {
    if (!Positive(d.uhb->read_bandwidth_gbps) || !Positive(d.uhb->write_bandwidth_gbps)) {
      out.push_back("uhb: link bandwidths must be positive");
    }
    if (d.uhb->round_trip_latency_ns < 0) {
      out.push_back("uhb: round_trip_latency must be non-negative");
    }
    if (!(d.uhb->toggle_rate > 0 && d.uhb->toggle_rate <= 1)) {
      out.push_back("uhb: toggle_rate must be in (0, 1]");
    }
    if (d.uhb->energy_per_bit_pj < 0) out.push_back("uhb: energy_per_bit must be non-negative");
  }

  if (d.dram.hbm_sites < 1) out.push_back("dram: at least one HBM site is required");
  if (!Positive(d.dram.bandwidth_per_site_gbps)) {
    out.push_back("dram: bandwidth_per_site must be positive");
  }
  if (!Positive(d.dram.capacity_per_site_gb)) {
    out.push_back("dram: capacity_per_site must be positive");
  }
  if (d.dram.access_latency_ns < 0) out.push_back("dram: access_latency must be non-negative");

  if (!d.msm_present) {
    if (d.l3) out.push_back("L3 requires MSM: l3 is set but msm_present is false");
    if (d.uhb) out.push_back("UHB link requires MSM: uhb is set but msm_present is false");
    if (d.dram_attach != DramAttach::kOnGpm) {
      out.push_back("DRAM must attach to the GPM when no MSM is present");
    }
  } else {
    if (!d.uhb) out.push_back("MSM requires a UHB link");
    if (d.integration == Integration::kMonolithic) {
      out.push_back("MSM requires stacked_3d or planar_2p5d integration, not monolithic");
    }
  }

  const std::uint64_t l3_cap = d.l3 ? d.l3->capacity : 0;
  if (d.integration == Integration::kStacked3d) {
    if (l3_cap > kMaxL3Stacked3d) {
      out.push_back(fmt::format(
          "3D L3 capacity limit: a single MSM die holds at most 960MB of L3 (got {})",
          FormatBytes(l3_cap)));
    }
    if (d.dram.hbm_sites > kMaxHbmSitesStacked3d) {
      out.push_back(fmt::format(
          "3D edge limit: stacked_3d adds no die edge, so at most {} HBM sites (got {})",
          kMaxHbmSitesStacked3d, d.dram.hbm_sites));
    }
  } else if (d.integration == Integration::kPlanar2p5d) {
    if (l3_cap > kMaxL3Planar2p5d) {
      out.push_back(fmt::format(
          "2.5D L3 capacity limit: two MSM dies hold at most 1920MB of L3 (got {})",
          FormatBytes(l3_cap)));
    }
    if (d.dram.hbm_sites > kMaxHbmSitesPlanar2p5d) {
      out.push_back(fmt::format("2.5D edge limit: at most {} HBM sites (got {})",
                                kMaxHbmSitesPlanar2p5d, d.dram.hbm_sites));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json BandwidthToJson(double gbps) { return IsInfinite(gbps) ? json("inf") : json(gbps); }

json CacheToJson(const CacheLevelSpec& c) {
  json j;
  j["capacity"] = FormatBytes(c.capacity);
  j["line_size"] = c.line_size;
  j["associativity"] =
      c.fully_associative() ? json("fully-associative") : json(c.associativity);
  j["read_bandwidth"] = BandwidthToJson(c.read_bandwidth_gbps);
  j["write_bandwidth"] = BandwidthToJson(c.write_bandwidth_gbps);
  j["access_latency_ns"] = c.access_latency_ns;
  return j;
}

// Field reader that reports errors with a dotted path.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& Required(std::string_view key) const {
    if (!node_.is_object()) throw ParseError(path_, "expected an object");
    auto it = node_.find(std::string(key));
    if (it == node_.end()) throw ParseError(Child(key), "missing required field");
    return *it;
  }
  const json* Optional(std::string_view key) const {
    if (!node_.is_object()) throw ParseError(path_, "expected an object");
    auto it = node_.find(std::string(key));
    return (it == node_.end() || it->is_null()) ? nullptr : &*it;
  }
  std::string Child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  double Number(std::string_view key, std::optional<double> fallback = {}) const {
    const json* v = fallback ? Optional(key) : &Required(key);
    if (!v) return *fallback;
    if (v->is_string() && (v->get<std::string>() == "inf")) return kInfinity;
    if (!v->is_number()) throw ParseError(Child(key), "expected a number");
    return v->get<double>();
  }
  long long Integer(std::string_view key, std::optional<long long> fallback = {}) const {
    const json* v = fallback ? Optional(key) : &Required(key);
    if (!v) return *fallback;
    if (!v->is_number_integer()) throw ParseError(Child(key), "expected an integer");
    return v->get<long long>();
  }
  bool Bool(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_boolean()) throw ParseError(Child(key), "expected true or false");
    return v.get<bool>();
  }
  std::string String(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_string()) throw ParseError(Child(key), "expected a string");
    return v.get<std::string>();
  }
  std::uint64_t Bytes(std::string_view key) const {
    const json& v = Required(key);
    if (v.is_number_unsigned() || v.is_number_integer()) {
      if (v.get<long long>() < 0) throw ParseError(Child(key), "must be non-negative");
      return v.get<std::uint64_t>();
    }
    if (!v.is_string()) throw ParseError(Child(key), "expected a byte count or string");
    try {
      return ParseBytes(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(Child(key), e.what());
    }
  }
  double Bandwidth(std::string_view key) const {
    const json& v = Required(key);
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) throw ParseError(Child(key), "expected GB/s or a suffixed string");
    try {
      return ParseBandwidthGBps(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(Child(key), e.what());
    }
  }
  Reader Sub(std::string_view key) const { return Reader(Required(key), Child(key)); }
  const json& node() const { return node_; }

 private:
  const json& node_;
  std::string path_;
};

CacheLevelSpec CacheFromJson(const Reader& r) {
  CacheLevelSpec c;
  c.capacity = r.Bytes("capacity");
  c.line_size = static_cast<std::uint32_t>(r.Integer("line_size", 128));
  if (const json* a = r.Optional("associativity")) {
    if (a->is_string()) {
      if (a->get<std::string>() != "fully-associative") {
        throw ParseError(r.Child("associativity"),
                         "expected a way count or \"fully-associative\"");
      }
      c.associativity = kFullyAssociative;
    } else if (a->is_number_integer() && a->get<long long>() > 0) {
      c.associativity = a->get<std::uint32_t>();
    } else {
      throw ParseError(r.Child("associativity"), "expected a positive way count");
    }
  }
  c.read_bandwidth_gbps = r.Bandwidth("read_bandwidth");
  c.write_bandwidth_gbps = r.Bandwidth("write_bandwidth");
  c.access_latency_ns = r.Number("access_latency_ns", 0.0);
  return c;
}

template <typename Enum, std::size_t N>
Enum EnumFromJson(const Reader& r, std::string_view key,
                  const std::array<Enum, N>& values) {
  const std::string s = r.String(key);
  for (Enum v : values) {
    if (ToString(v) == s) return v;
  }
  std::string valid;
  for (Enum v : values) valid += (valid.empty() ? "" : ", ") + std::string(ToString(v));
  throw ParseError(r.Child(key), fmt::format("unknown value '{}' (expected {})", s, valid));
}

}  // namespace

json DesignToJson(const CopaDesign& d) {
  json j;
  j["name"] = d.name;
  j["integration"] = ToString(d.integration);
  j["core"] = {{"sm_count", d.core.sm_count},
               {"frequency_ghz", d.core.frequency_ghz},
               {"peak_fp32_tflops", d.core.peak_fp32_tflops},
               {"peak_fp16_tflops", d.core.peak_fp16_tflops},
               {"kernel_launch_overhead_us", d.core.kernel_launch_overhead_us}};
  j["l2"] = CacheToJson(d.l2);
  j["msm_present"] = d.msm_present;
  j["l3"] = d.l3 ? CacheToJson(*d.l3) : json(nullptr);
  if (d.uhb) {
    j["uhb"] = {{"read_bandwidth", BandwidthToJson(d.uhb->read_bandwidth_gbps)},
                {"write_bandwidth", BandwidthToJson(d.uhb->write_bandwidth_gbps)},
                {"round_trip_latency_ns", d.uhb->round_trip_latency_ns},
                {"energy_per_bit_pj", d.uhb->energy_per_bit_pj},
                {"toggle_rate", d.uhb->toggle_rate}};
  } else {
    j["uhb"] = nullptr;
  }
  j["dram"] = {{"hbm_sites", d.dram.hbm_sites},
               {"bandwidth_per_site", BandwidthToJson(d.dram.bandwidth_per_site_gbps)},
               {"capacity_per_site_gb", IsInfinite(d.dram.capacity_per_site_gb)
                                            ? json("inf")
                                            : json(d.dram.capacity_per_site_gb)},
               {"access_latency_ns", d.dram.access_latency_ns}};
  j["dram_attach"] = ToString(d.dram_attach);
  return j;
}

CopaDesign DesignFromJson(const json& doc) {
  Reader r(doc, "");
  CopaDesign d;
  d.name = r.String("name");
  d.integration = EnumFromJson(
      r, "integration",
      std::array{Integration::kMonolithic, Integration::kStacked3d, Integration::kPlanar2p5d});

  Reader core = r.Sub("core");
  d.core.sm_count = static_cast<int>(core.Integer("sm_count"));
  d.core.frequency_ghz = core.Number("frequency_ghz");
  d.core.peak_fp32_tflops = core.Number("peak_fp32_tflops");
  d.core.peak_fp16_tflops = core.Number("peak_fp16_tflops");
  d.core.kernel_launch_overhead_us = core.Number("kernel_launch_overhead_us", 2.0);

  d.l2 = CacheFromJson(r.Sub("l2"));
  d.msm_present = r.Bool("msm_present");
  if (r.Optional("l3")) d.l3 = CacheFromJson(r.Sub("l3"));
  if (r.Optional("uhb")) {
    Reader u = r.Sub("uhb");
    UhbLinkSpec link;
    link.read_bandwidth_gbps = u.Bandwidth("read_bandwidth");
    link.write_bandwidth_gbps = u.Bandwidth("write_bandwidth");
    link.round_trip_latency_ns = u.Number("round_trip_latency_ns", 0.0);
    link.energy_per_bit_pj = u.Number("energy_per_bit_pj", 0.3);
    link.toggle_rate = u.Number("toggle_rate", 0.25);
    d.uhb = link;
  }

  Reader dram = r.Sub("dram");
  d.dram.hbm_sites = static_cast<int>(dram.Integer("hbm_sites"));
  d.dram.bandwidth_per_site_gbps = dram.Bandwidth("bandwidth_per_site");
  d.dram.capacity_per_site_gb = dram.Number("capacity_per_site_gb");
  d.dram.access_latency_ns = dram.Number("access_latency_ns", kDramLatencyNs);

  d.dram_attach =
      EnumFromJson(r, "dram_attach", std::array{DramAttach::kOnGpm, DramAttach::kOnMsm});
  return d;
}

CopaDesign LoadDesign(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
  CopaDesign d = DesignFromJson(doc);
  if (auto violations = Validate(d); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return d;
}

std::string SerializeDesign(const CopaDesign& d) { return DesignToJson(d).dump(2); }

CopaDesign WithLineSize(CopaDesign d, std::uint32_t line_size) {
  d.l2.line_size = line_size;
  if (d.l3) d.l3->line_size = line_size;
  return d;
}

}  // namespace copa

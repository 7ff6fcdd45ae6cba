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

#ifndef COPA_PACKAGE_MODEL_H_
#define COPA_PACKAGE_MODEL_H_

// Package-level arithmetic for on-package UHB links, HBM site scaling and
// memory-side L3 area budgeting.

#include <string>
#include <vector>

#include "copa/arch_config.h"
#include "json.hpp"

namespace copa {

enum class LinkTech { kPlanar2p5d, kStacked3d };

struct TechParams {
  LinkTech tech = LinkTech::kPlanar2p5d;
  // GB/s per mm of die edge (2.5D) or GB/s per mm^2 of bonded area (3D).
  double bw_density = 256.0;
  double energy_per_bit_pj = 0.3;
  double signaling_rate_gbps = 20.0;  // 2.5D only
  // Largest UHB area, as a fraction of the GPM die, that is acceptable.
  double area_budget = 0.06;
  // Depth of the 2.5D PHY strip behind each mm of edge. Sized so that a
  // maximal 14.7 TB/s link costs about 6% of an 826 mm^2 die.
  double phy_depth_mm = 0.85;

  static TechParams Planar2p5d();
  static TechParams Stacked3d();
};

TechParams TechFor(Integration integration);

struct DieSpec {
  double area_mm2 = 826.0;
  int count = 1;
  // Portion of the die perimeter that may carry UHB PHYs.
  double uhb_edge_fraction = 0.5;
  double l3_density_mb_per_mm2 = 960.0 / 826.0;

  // Square die.
  double edge_length_mm() const;
  double total_area_mm2() const { return area_mm2 * count; }
};

// MSM dies that back each preset: HBM+L3 uses one 826 mm^2 die in 3D or two
// half-size dies in 2.5D; the L3L variants use two full-size dies.
DieSpec DefaultMsmDie(const CopaDesign& design);

struct FeasibilityReport {
  double uhb_area_mm2 = 0;
  double uhb_area_fraction = 0;
  double uhb_edge_mm = 0;
  double link_power_w = 0;
  double l3_area_required_mm2 = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Bonded area for a 3D link. Bandwidth in TB/s, result in mm^2.
double UhbArea3d(double bandwidth_tbps, const TechParams& tech);

// Die edge consumed by a 2.5D link. Bandwidth in TB/s, result in mm.
double UhbEdge2p5d(double bandwidth_tbps, const TechParams& tech);

// Link power at full utilization: bytes/s x 8 x energy/bit x toggle rate.
double LinkPower(double bandwidth_tbps, const TechParams& tech, double toggle_rate);

struct HbmResources {
  double bandwidth_gbps = 0;
  double capacity_gb = 0;
};

// Totals for `sites` HBM sites using the per-site figures of `per_site`.
HbmResources HbmResourcesFor(int sites, const DramSpec& per_site);

// L3 capacity (MB) that fits in `msm_area_mm2` of MSM silicon.
double L3Budget(double msm_area_mm2, const DieSpec& die);

FeasibilityReport CheckFeasibility(const CopaDesign& design, const TechParams& tech,
                                   const DieSpec& gpm_die, const DieSpec& msm_die);

nlohmann::json ToJson(const FeasibilityReport& report);

}  // namespace copa

#endif  // COPA_PACKAGE_MODEL_H_

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

#include "copa/package_model.h"

#include <cmath>

#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

TechParams TechParams::Planar2p5d() { return TechParams{}; }

TechParams TechParams::Stacked3d() {
  TechParams t;
  t.tech = LinkTech::kStacked3d;
  t.bw_density = 512.0;
  t.energy_per_bit_pj = 0.05;
  t.signaling_rate_gbps = 0.0;
  t.area_budget = 0.04;
  t.phy_depth_mm = 0.0;
  return t;
}

TechParams TechFor(Integration integration) {
  return integration == Integration::kStacked3d ? TechParams::Stacked3d()
                                                : TechParams::Planar2p5d();
}

double DieSpec::edge_length_mm() const { return 4.0 * std::sqrt(area_mm2); }

DieSpec DefaultMsmDie(const CopaDesign& design) {
  DieSpec die;
  if (design.integration == Integration::kPlanar2p5d) {
    die.count = 2;
    const std::uint64_t l3 = design.l3 ? design.l3->capacity : 0;
    if (l3 <= kMaxL3Stacked3d) die.area_mm2 = 826.0 / 2.0;
  }
  return die;
}

double UhbArea3d(double bandwidth_tbps, const TechParams& tech) {
  if (tech.tech != LinkTech::kStacked3d) {
    throw ContractError("UhbArea3d requires 3D link technology parameters");
  }
  if (!(bandwidth_tbps >= 0)) throw ContractError("bandwidth must be non-negative");
  return bandwidth_tbps * 1e3 / tech.bw_density;
}

double UhbEdge2p5d(double bandwidth_tbps, const TechParams& tech) {
  if (tech.tech != LinkTech::kPlanar2p5d) {
    throw ContractError("UhbEdge2p5d requires 2.5D link technology parameters");
  }
  if (!(bandwidth_tbps >= 0)) throw ContractError("bandwidth must be non-negative");
  return bandwidth_tbps * 1e3 / tech.bw_density;
}

double LinkPower(double bandwidth_tbps, const TechParams& tech, double toggle_rate) {
  if (!(toggle_rate > 0 && toggle_rate <= 1)) {
    throw ContractError("toggle_rate must be in (0, 1]");
  }
  return bandwidth_tbps * kTB * 8.0 * tech.energy_per_bit_pj * 1e-12 * toggle_rate;
}

HbmResources HbmResourcesFor(int sites, const DramSpec& per_site) {
  if (sites < 0) throw ContractError("site count must be non-negative");
  return {sites * per_site.bandwidth_per_site_gbps, sites * per_site.capacity_per_site_gb};
}

double L3Budget(double msm_area_mm2, const DieSpec& die) {
  if (!(msm_area_mm2 >= 0)) throw ContractError("MSM area must be non-negative");
  return msm_area_mm2 * die.l3_density_mb_per_mm2;
}

FeasibilityReport CheckFeasibility(const CopaDesign& design, const TechParams& tech,
                                   const DieSpec& gpm_die, const DieSpec& msm_die) {
  FeasibilityReport r;
  const double link_tbps = design.uhb ? design.uhb->total_bandwidth_gbps() / 1e3 : 0.0;
  const double toggle = design.uhb ? design.uhb->toggle_rate : 0.25;

  if (design.msm_present && !(link_tbps > 0)) {
    r.violations.push_back("MSM present but link bandwidth is zero");
  }
  if (std::isinf(link_tbps)) {
    r.violations.push_back("UHB link bandwidth is infinite and cannot be packaged");
  } else if (design.msm_present) {
    if (tech.tech == LinkTech::kStacked3d) {
      r.uhb_area_mm2 = UhbArea3d(link_tbps, tech);
    } else {
      r.uhb_edge_mm = UhbEdge2p5d(link_tbps, tech);
      r.uhb_area_mm2 = r.uhb_edge_mm * tech.phy_depth_mm;
      const double edge_budget = gpm_die.edge_length_mm() * gpm_die.uhb_edge_fraction;
      if (r.uhb_edge_mm > edge_budget) {
        r.violations.push_back(fmt::format(
            "UHB link needs {:.2f} mm of GPM edge but only {:.2f} mm is assignable",
            r.uhb_edge_mm, edge_budget));
      }
    }
    r.uhb_area_fraction = r.uhb_area_mm2 / gpm_die.area_mm2;
    r.link_power_w = LinkPower(link_tbps, tech, toggle);
    if (r.uhb_area_fraction > tech.area_budget) {
      r.violations.push_back(fmt::format("UHB area {:.2f} mm^2 is {:.2f}% of the GPM, over the {:.0f}% budget",
                                         r.uhb_area_mm2, 100 * r.uhb_area_fraction,
                                         100 * tech.area_budget));
    }
  }

  if (design.l3 && design.l3->capacity > 0) {
    if (design.l3->infinite_capacity()) {
      r.l3_area_required_mm2 = kInfinity;
    } else {
      const double mb = static_cast<double>(design.l3->capacity) / static_cast<double>(kMiB);
      r.l3_area_required_mm2 = mb / msm_die.l3_density_mb_per_mm2;
    }
    // Compare in MB to keep the exact-fit case (960 MB on 826 mm^2) exact.
    const double available_mb = L3Budget(msm_die.total_area_mm2(), msm_die);
    const double need_mb = design.l3->infinite_capacity()
                               ? kInfinity
                               : static_cast<double>(design.l3->capacity) / kMiB;
    if (need_mb > available_mb * (1 + 1e-12)) {
      r.violations.push_back(fmt::format(
          "L3 exceeds MSM area budget: {:.0f} MB needs {:.1f} mm^2 but the MSM provides "
          "{:.1f} mm^2",
          need_mb, r.l3_area_required_mm2, msm_die.total_area_mm2()));
    }
  }

  const int sites = design.dram.hbm_sites;
  if (design.integration == Integration::kStacked3d && sites > kMaxHbmSitesStacked3d) {
    r.violations.push_back(fmt::format(
        "3D edge limit: at most {} HBM sites (got {})", kMaxHbmSitesStacked3d, sites));
  } else if (design.integration == Integration::kPlanar2p5d &&
             sites > kMaxHbmSitesPlanar2p5d) {
    r.violations.push_back(fmt::format("2.5D edge limit: at most {} HBM sites (got {})",
                                       kMaxHbmSitesPlanar2p5d, sites));
  }
  return r;
}

nlohmann::json ToJson(const FeasibilityReport& r) {
  auto finite = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
  return {{"uhb_area_mm2", finite(r.uhb_area_mm2)},
          {"uhb_area_fraction", finite(r.uhb_area_fraction)},
          {"uhb_edge_mm", finite(r.uhb_edge_mm)},
          {"link_power_w", finite(r.link_power_w)},
          {"l3_area_required_mm2", finite(r.l3_area_required_mm2)},
          {"violations", r.violations},
          {"ok", r.ok()}};
}

}  // namespace copa

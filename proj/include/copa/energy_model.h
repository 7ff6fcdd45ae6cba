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

#ifndef COPA_ENERGY_MODEL_H_
#define COPA_ENERGY_MODEL_H_

// Memory-system energy: DRAM accesses versus round trips to an SRAM L3 on the
// MSM, and the ratio against sending every post-L2 byte to DRAM.

#include <iosfwd>
#include <optional>

#include "copa/arch_config.h"
#include "copa/cache_sim.h"
#include "copa/package_model.h"
#include "json.hpp"

namespace copa {

struct EnergyParams {
  double e_dram_pj = 7.0;      // per bit
  double e_l3_total_pj = 1.75;  // per bit, link traversal plus SRAM access
  TechParams link_tech = TechParams::Planar2p5d();
  double toggle_rate = 0.25;
};

// Defaults with the link technology and toggle rate of `design`.
EnergyParams EnergyParamsFor(const CopaDesign& design);

struct EnergyReport {
  double dram_j = 0;
  double l3_j = 0;
  double link_j = 0;  // informational; already inside l3_j
  double total_j = 0;
  std::optional<double> ratio_vs_no_l3;  // nullopt: no traffic
};

EnergyReport MemoryEnergy(const TrafficCounts& traffic, const EnergyParams& params = {});
EnergyReport MemoryEnergy(const TrafficReport& traffic, const EnergyParams& params = {});

// Closed form for a fraction `reduction` of post-L2 traffic filtered by the L3.
double EnergyRatioForReduction(double reduction, const EnergyParams& params = {});

nlohmann::json ToJson(const EnergyReport& report);
// dram_j,l3_j,total_j,ratio
void WriteEnergyCsvRow(const EnergyReport& report, std::ostream& out, bool header = false);

}  // namespace copa

#endif  // COPA_ENERGY_MODEL_H_

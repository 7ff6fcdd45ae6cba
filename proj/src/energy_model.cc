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

#include "copa/energy_model.h"

#include <ostream>

#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

EnergyParams EnergyParamsFor(const CopaDesign& design) {
  EnergyParams p;
  if (design.msm_present && design.integration != Integration::kMonolithic) {
    p.link_tech = TechFor(design.integration);
  }
  if (design.uhb) {
    p.link_tech.energy_per_bit_pj = design.uhb->energy_per_bit_pj;
    p.toggle_rate = design.uhb->toggle_rate;
  }
  return p;
}

EnergyReport MemoryEnergy(const TrafficCounts& t, const EnergyParams& params) {
  constexpr double kPj = 1e-12;
  const double dram_bits = 8.0 * static_cast<double>(t.dram.total());
  const double link_bits = 8.0 * static_cast<double>(t.link.total());
  const double post_l2_bits = 8.0 * static_cast<double>(t.l2_out.total());

  EnergyReport r;
  r.dram_j = dram_bits * params.e_dram_pj * kPj;
  // Hits, fills, and written-back lines all make the trip to the MSM.
  r.l3_j = link_bits * params.e_l3_total_pj * kPj;
  r.link_j = link_bits * params.link_tech.energy_per_bit_pj * params.toggle_rate * kPj;
  r.total_j = r.dram_j + r.l3_j;
  if (r.total_j > 0) r.ratio_vs_no_l3 = post_l2_bits * params.e_dram_pj * kPj / r.total_j;
  return r;
}

EnergyReport MemoryEnergy(const TrafficReport& traffic, const EnergyParams& params) {
  return MemoryEnergy(traffic.total, params);
}

double EnergyRatioForReduction(double reduction, const EnergyParams& params) {
  if (!(reduction >= 0 && reduction <= 1)) throw ContractError("reduction must be in [0, 1]");
  return params.e_dram_pj / (params.e_l3_total_pj + (1 - reduction) * params.e_dram_pj);
}

nlohmann::json ToJson(const EnergyReport& r) {
  return {{"dram_j", r.dram_j},
          {"l3_j", r.l3_j},
          {"link_j", r.link_j},
          {"total_j", r.total_j},
          {"ratio_vs_no_l3", r.ratio_vs_no_l3 ? nlohmann::json(*r.ratio_vs_no_l3)
                                              : nlohmann::json("no-traffic")}};
}

void WriteEnergyCsvRow(const EnergyReport& r, std::ostream& out, bool header) {
  if (header) out << "dram_j,l3_j,total_j,ratio\n";
  out << fmt::format("{:.6g},{:.6g},{:.6g},{}\n", r.dram_j, r.l3_j, r.total_j,
                     r.ratio_vs_no_l3 ? fmt::format("{:.6g}", *r.ratio_vs_no_l3)
                                      : std::string("no-traffic"));
}

}  // namespace copa

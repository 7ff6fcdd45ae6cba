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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "copa/errors.h"
#include "copa/perf_model.h"
#include "copa/sweep_harness.h"
#include "copa/units.h"
#include "copa/workload_gen.h"

namespace copa {
namespace {

using nlohmann::json;

std::vector<WorkloadRef> SmallSuite() {
  return {DlWorkload("ncf", Mode::kTraining, 2048, Regime::kTrainSb),
          DlWorkload("gnmt", Mode::kInference, 1, Regime::kInferSb),
          HpcWorkload("h", {32 * kMiB, 0.5, 2.0, 4})};
}

SweepSpec Spec(SweepAxis axis, std::vector<WorkloadRef> suite = SmallSuite()) {
  SweepSpec s;
  s.name = std::string(ToString(axis));
  s.axis = axis;
  s.suite = std::move(suite);
  s.base_design = Preset("GPU-N");
  return s;
}

std::string Csv(const SweepResult& r) {
  std::ostringstream out;
  WriteSweepCsv(r, out);
  return out.str();
}

TEST(Geomean, Basics) {
  EXPECT_DOUBLE_EQ(Geomean({1, 4}), 2.0);
  EXPECT_DOUBLE_EQ(Geomean({3.5}), 3.5);
  EXPECT_THROW(Geomean({}), ContractError);
  EXPECT_THROW(Geomean({1, 0}), ContractError);
  EXPECT_THROW(Geomean({1, -2}), ContractError);
}

TEST(Suites, RegimesAndNames) {
  const auto dl = DlSuite();
  EXPECT_EQ(dl.size(), 2 * DlPresetCatalog().size());
  EXPECT_EQ(dl.front().name, "resnet-train-b128");
  EXPECT_FALSE(FilterRegime(dl, Regime::kInferSb).empty());
  EXPECT_EQ(HpcSuite().size(), 5u);
  EXPECT_EQ(ParseRegime("train_lb"), Regime::kTrainLb);
  EXPECT_THROW(ParseRegime("bulk"), std::invalid_argument);
  EXPECT_EQ(ParseAxis(ToString(SweepAxis::kGpuCount)), SweepAxis::kGpuCount);
}

TEST(AutoLineSize, ClampsAndRoundsUp) {
  EXPECT_EQ(AutoLineSize(0), 128u);
  EXPECT_EQ(AutoLineSize(8 * kMiB), 128u);
  EXPECT_EQ(AutoLineSize(64 * kMiB), 1024u);
  EXPECT_EQ(AutoLineSize(64 * kMiB + 1), 2048u);
  EXPECT_EQ(AutoLineSize(1024 * kGiB), 64 * kKiB);
}

// Coarse lines are a speed knob; they should not move the answer.
TEST(AutoLineSize, CoarseLinesKeepSpeedups) {
  const auto ratio = [](const Trace& t) {
    const double base = copa::Run(t, WithLineSize(Preset("GPU-N"), t.line_size)).total_seconds;
    return base / copa::Run(t, WithLineSize(Preset("HBML+L3"), t.line_size)).total_seconds;
  };
  const DlModelSpec model = DlPreset("gnmt", Mode::kInference);
  const Trace fine = GenDlTrace(model, 16, 1, 128);
  const Trace coarse = GenDlTrace(model, 16, 1, AutoLineSize(fine.footprint));
  ASSERT_GT(coarse.line_size, fine.line_size);
  EXPECT_NEAR(ratio(coarse), ratio(fine), 0.01 * ratio(fine));
}

TEST(Variants, DesignAdjustments) {
  const CopaDesign d = WithDramMultiplier(Preset("GPU-N"), 2);
  EXPECT_NEAR(d.dram.total_bandwidth_gbps(), 2 * Preset("GPU-N").dram.total_bandwidth_gbps(), 1e-9);
  EXPECT_TRUE(IsInfinite(WithDramMultiplier(Preset("GPU-N"), kInfinity).dram.total_bandwidth_gbps()));
  const CopaDesign l = WithLlcCapacity(Preset("GPU-N"), 240 * kMiB);
  EXPECT_EQ(l.l2.capacity, 240 * kMiB);
  EXPECT_TRUE(l.l2.fully_associative());
  const CopaDesign k = WithLinkMultiplier(Preset("HBML+L3"), 4, 1000);
  EXPECT_DOUBLE_EQ(k.uhb->read_bandwidth_gbps, 4000);
  EXPECT_DOUBLE_EQ(k.l3->write_bandwidth_gbps, 4000);
  EXPECT_THROW(WithLinkMultiplier(Preset("GPU-N"), 2, 1000), ContractError);
  EXPECT_THROW(WithDramMultiplier(Preset("GPU-N"), 0), ContractError);
}

TEST(Sweeps, DramMultiplierOneIsBaseline) {
  Evaluator eval;
  const auto r = SweepDramBw(Spec(SweepAxis::kDramBwMultiplier), eval);
  const auto one = r.PointIndex("1");
  ASSERT_TRUE(one.has_value());
  for (std::size_t w = 0; w < r.workloads.size(); ++w) {
    EXPECT_DOUBLE_EQ(r.speedup[w][*one], 1.0);
    for (std::size_t p = 1; p < r.points.size(); ++p) {
      EXPECT_GE(r.speedup[w][p], r.speedup[w][p - 1] - 1e-12) << r.workloads[w];
    }
  }
}

TEST(Sweeps, LlcBaselinePointHasNoReduction) {
  Evaluator eval;
  const auto r = SweepLlc(Spec(SweepAxis::kLlcCapacity), eval);
  const auto base = r.PointIndex("60MB");
  ASSERT_TRUE(base.has_value());
  for (std::size_t w = 0; w < r.workloads.size(); ++w) {
    EXPECT_DOUBLE_EQ(r.speedup[w][*base], 1.0);
    ASSERT_TRUE(r.traffic_reduction[w][*base].has_value());
    EXPECT_DOUBLE_EQ(*r.traffic_reduction[w][*base], 0.0);
    for (std::size_t p = 1; p < r.points.size(); ++p) {
      EXPECT_LE(r.dram_gb[w][p], r.dram_gb[w][p - 1]) << r.workloads[w];
      EXPECT_GE(r.speedup[w][p], r.speedup[w][p - 1] - 1e-12) << r.workloads[w];
    }
  }
}

TEST(Sweeps, LinkSweepNeedsL3) {
  Evaluator eval;
  SweepSpec s = Spec(SweepAxis::kL3LinkBw);
  EXPECT_THROW(SweepL3LinkBw(s, eval), ContractError);
  s.target_design = Preset("HBML+L3");
  const auto r = SweepL3LinkBw(s, eval);
  EXPECT_EQ(r.points.back(), "inf");
  EXPECT_THROW(SweepDramBw(s, eval), ContractError);
}

TEST(Sweeps, CompareDesignsAgainstItself) {
  Evaluator eval;
  SweepSpec s = Spec(SweepAxis::kNamedDesigns);
  s.points = {{"GPU-N", 0}, {"PerfectL2", 0}};
  const auto r = CompareDesigns(s, eval);
  for (std::size_t w = 0; w < r.workloads.size(); ++w) {
    EXPECT_DOUBLE_EQ(r.speedup[w][0], 1.0);
    EXPECT_GE(r.speedup[w][1], 1.0);
  }
  s.points = {{"GPU-X", 0}};
  EXPECT_THROW(CompareDesigns(s, eval), UnknownPresetError);
}

TEST(Sweeps, ScaleOutSingleGpuIsBaseline) {
  Evaluator eval;
  SweepSpec s = Spec(SweepAxis::kGpuCount, {DlWorkload("ncf", Mode::kTraining, 2048,
                                                       Regime::kTrainSb),
                                            DlWorkload("resnet", Mode::kTraining, 12,
                                                       Regime::kTrainSb)});
  s.points = {{"1", 1}, {"2", 2}, {"8", 8}};
  s.designs = {Preset("HBML+L3")};
  const auto r = ScaleOut(s, eval);
  ASSERT_EQ(r.points.size(), 4u);
  EXPECT_EQ(r.points.back(), "HBML+L3");
  for (std::size_t w = 0; w < r.workloads.size(); ++w) {
    EXPECT_DOUBLE_EQ(r.speedup[w][0], 1.0);
    EXPECT_LE(r.speedup[w][1], 2.0);
    EXPECT_LE(r.speedup[w][2], 8.0);
    EXPECT_GE(r.speedup[w][2], r.speedup[w][1]);
  }
  s.suite = {HpcWorkload("h", {kMiB, 0.5, 1, 2})};
  EXPECT_THROW(ScaleOut(s, eval), ContractError);
}

TEST(Sweeps, ParallelMatchesSerial) {
  Evaluator serial;
  Evaluator parallel(SweepOptions{4});
  const auto s = Spec(SweepAxis::kDramBwMultiplier);
  EXPECT_EQ(Csv(SweepDramBw(s, serial)), Csv(SweepDramBw(s, parallel)));
}

TEST(Sweeps, CsvLayout) {
  Evaluator eval;
  SweepSpec s = Spec(SweepAxis::kDramBwMultiplier);
  s.points = {{"1", 1}, {"2", 2}};
  const auto r = SweepDramBw(s, eval);
  std::istringstream in(Csv(r));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "workload,regime,axis_value,speedup,traffic_reduction,dram_gb,energy_ratio");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("ncf-train-b2048,train_sb,1,1.000000,", 0), 0u) << line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
  const auto summary = SweepSummary(r);
  EXPECT_EQ(summary["axis"], "dram_bw_multiplier");
  EXPECT_TRUE(summary["geomean_speedup"].contains("hpc"));
}

TEST(SpecLoading, ParsesAllForms) {
  const json doc = json::parse(R"({
    "seed": 3, "line_size": 256,
    "sweeps": [
      {"axis": "dram_bw_multiplier", "suite": ["hpc", {"preset": "ncf", "mode": "training", "batch": 64}],
       "points": [1, "inf"]},
      {"axis": "named_designs", "name": "cmp", "points": ["GPU-N", "HBM+L3"]},
      {"axis": "gpu_count", "suite": ["train_lb"], "designs": ["HBML+L3"]}
    ]})");
  const auto specs = LoadSweepSpecs(doc);
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[0].line_size, 256u);
  EXPECT_EQ(specs[0].suite.size(), 6u);
  EXPECT_EQ(specs[0].suite.back().seed, 3u);
  EXPECT_TRUE(IsInfinite(specs[0].points[1].value));
  EXPECT_EQ(specs[1].name, "cmp");
  EXPECT_EQ(specs[1].designs.size(), 2u);
  EXPECT_EQ(specs[2].designs.at(0).name, "HBML+L3");
  EXPECT_EQ(specs[2].points.size(), 3u);
}

TEST(SpecLoading, ErrorsCarryPaths) {
  auto path_of = [](const char* text) {
    try {
      LoadSweepSpecs(json::parse(text));
    } catch (const ParseError& e) {
      return e.path();
    }
    return std::string("no error");
  };
  EXPECT_EQ(path_of(R"({"sweeps": []})"), "sweeps");
  EXPECT_EQ(path_of(R"({"sweeps": [{"axis": "sideways"}]})"), "sweeps[0].axis");
  EXPECT_EQ(path_of(R"({"sweeps": [{"axis": "dram_bw_multiplier", "points": [0]}]})"), "sweeps[0].points");
  EXPECT_EQ(path_of(R"({"sweeps": [{"axis": "dram_bw_multiplier", "base_design": "GPU-X"}]})"),
            "sweeps[0].base_design");
  EXPECT_EQ(path_of(R"({"line_size": 100, "sweeps": [{"axis": "dram_bw_multiplier"}]})"), "line_size");
}

TEST(Outputs, WritesCsvAndSummary) {
  Evaluator eval;
  SweepSpec s = Spec(SweepAxis::kDramBwMultiplier);
  s.points = {{"1", 1}, {"inf", kInfinity}};
  const auto dir = std::filesystem::temp_directory_path() / "copa_sweep_outputs_test";
  std::filesystem::remove_all(dir);
  const auto files = WriteSweepOutputs({SweepDramBw(s, eval)}, dir);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "dram_bw_multiplier.csv"));
  std::ifstream in(dir / "summary.json");
  const json summary = json::parse(in);
  EXPECT_EQ(summary["sweeps"][0]["points"].size(), 2u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace copa

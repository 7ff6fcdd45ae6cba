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
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "copa/arch_config.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Outcome Copa(const std::string& args) {
  const std::string cmd = std::string(COPA_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return o;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("copa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string At(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, PresetsListsNine) {
  const auto o = Copa("presets");
  EXPECT_EQ(o.code, 0);
  int lines = 0;
  std::istringstream in(o.out);
  for (std::string l; std::getline(in, l);) lines += !l.empty();
  EXPECT_EQ(lines, 9);
  EXPECT_NE(o.out.find("HBMLL+L3L"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(Copa("").code, 2);
  EXPECT_EQ(Copa("frobnicate").code, 2);
  EXPECT_EQ(Copa("gen --preset alexnet").code, 2);
  EXPECT_EQ(Copa("run --design GPU-N").code, 2);
}

TEST_F(Cli, PackageCheck) {
  EXPECT_EQ(Copa("package check --design HBM+L3").code, 0);
  json bad = copa::DesignToJson(copa::Preset("HBM+L3"));
  bad["dram"]["hbm_sites"] = 14;
  std::ofstream(At("bad.json")) << bad.dump();
  const auto o = Copa("package check --design " + At("bad.json"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.out.find("3D edge limit"), std::string::npos) << o.out;
}

TEST_F(Cli, GenThenRunWithAttribution) {
  ASSERT_EQ(Copa("gen --preset gnmt --mode inference --batch 1 --seed 7 -o " + At("t.jsonl")).code, 0);
  const auto a = Slurp(At("t.jsonl"));
  ASSERT_EQ(Copa("gen --preset gnmt --mode inference --batch 1 --seed 7 -o " + At("u.jsonl")).code, 0);
  EXPECT_EQ(a, Slurp(At("u.jsonl")));

  const auto o = Copa("run --design GPU-N --trace " + At("t.jsonl") + " --attribute");
  ASSERT_EQ(o.code, 0) << o.out;
  const json j = json::parse(o.out);
  const json& b = j["attribution"];
  const double sum = b["math"].get<double>() + b["sm_idle"].get<double>() +
                     b["mem_other"].get<double>() + b["dram_bw"].get<double>();
  EXPECT_NEAR(sum / b["total"].get<double>(), 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(b["total"].get<double>(), j["result"]["total_seconds"].get<double>());
}

TEST_F(Cli, RunRejectsBrokenInputs) {
  std::ofstream(At("broken.jsonl")) << "{\"name\": 3}\n";
  EXPECT_EQ(Copa("run --design GPU-N --trace " + At("broken.jsonl")).code, 1);
  ASSERT_EQ(Copa("gen --preset hpc --working-set 4MB --reuse 0.5 --kernels 2 -o " + At("h.jsonl")).code, 0);
  json bad = copa::DesignToJson(copa::Preset("GPU-N"));
  bad["core"]["sm_count"] = 0;
  std::ofstream(At("bad.json")) << bad.dump();
  EXPECT_EQ(Copa("run --design " + At("bad.json") + " --trace " + At("h.jsonl")).code, 1);
}

TEST_F(Cli, SweepAndReport) {
  std::ofstream(At("spec.json")) << R"({"seed": 1, "sweeps": [
      {"name": "bw", "axis": "dram_bw_multiplier", "points": [1, 2, "inf"],
       "suite": [{"preset": "ncf", "mode": "training", "batch": 2048, "regime": "train_sb"},
                 {"hpc": {"working_set": "16MB", "reuse_fraction": 0.5, "flop_byte_ratio": 2, "kernels": 4}}]},
      {"name": "cmp", "axis": "named_designs", "points": ["GPU-N", "HBML+L3"],
       "suite": [{"preset": "gnmt", "mode": "inference", "batch": 1, "regime": "infer_sb"}]}]})";
  ASSERT_EQ(Copa("sweep --spec " + At("spec.json") + " -o " + At("r1")).code, 0);
  ASSERT_EQ(Copa("sweep --jobs 3 --spec " + At("spec.json") + " -o " + At("r2")).code, 0);
  for (const char* f : {"bw.csv", "cmp.csv", "summary.json"}) {
    EXPECT_EQ(Slurp(dir_ / "r1" / f), Slurp(dir_ / "r2" / f)) << f;
  }
  const auto rep = Copa("report " + At("r1"));
  EXPECT_EQ(rep.code, 0) << rep.out;
  EXPECT_NE(rep.out.find("Fig. 10"), std::string::npos);
  EXPECT_EQ(rep.out, Copa("report --deterministic " + At("r1")).out);

  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(Copa("report " + At("empty")).code, 1);
}

TEST_F(Cli, SweepSpecErrorsExitOne) {
  std::ofstream(At("spec.json")) << R"({"sweeps": [{"axis": "sideways"}]})";
  const auto o = Copa("sweep --spec " + At("spec.json") + " -o " + At("r"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.out.find("sweeps[0].axis"), std::string::npos) << o.out;
}

}  // namespace

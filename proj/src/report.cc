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

#include "copa/report.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "copa/sweep_harness.h"
#include "fmt/format.h"
#include "json.hpp"

namespace copa {

namespace {

struct Row {
  std::string workload, regime, point;
  double speedup = 0;
  std::optional<double> reduction;
  double dram_gb = 0;
  std::optional<double> energy;
};

struct Table {
  std::string name;
  std::string axis;
  std::vector<std::string> points;  // in file order
  std::vector<Row> rows;
};

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> ParseOpt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::optional<Table> ReadCsv(const std::filesystem::path& file, std::string& error) {
  std::ifstream in(file);
  if (!in) {
    error = fmt::format("{}: cannot read", file.string());
    return std::nullopt;
  }
  Table t;
  t.name = file.stem().string();
  std::string line;
  std::getline(in, line);
  if (line.rfind("workload,regime,axis_value,speedup", 0) != 0) {
    error = fmt::format("{}: not a sweep CSV", file.string());
    return std::nullopt;
  }
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = Split(line);
    try {
      if (c.size() != 7) throw std::invalid_argument("expected 7 columns");
      Row r{c[0], c[1], c[2], std::stod(c[3]), ParseOpt(c[4]), std::stod(c[5]), ParseOpt(c[6])};
      if (std::find(t.points.begin(), t.points.end(), r.point) == t.points.end()) {
        t.points.push_back(r.point);
      }
      t.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      error = fmt::format("{}:{}: {}", file.string(), n, e.what());
      return std::nullopt;
    }
  }
  return t;
}

std::string GuessAxis(const Table& t) {
  bool all_numeric = true;
  for (const auto& p : t.points) {
    if (p.find('+') != std::string::npos) return "l3_link_bw";
    if (p == "perfect" || p.ends_with("MB") || p.ends_with("GB")) return "llc_capacity";
    if (p != "inf" && p.find_first_not_of("0123456789.") != std::string::npos) all_numeric = false;
  }
  if (!all_numeric) return t.points.front() == "1" ? "gpu_count" : "named_designs";
  return "dram_bw_multiplier";
}

const std::vector<std::string> kRegimes = {"train_lb", "train_sb", "infer_lb", "infer_sb", "hpc"};

std::vector<std::string> RegimesIn(const Table& t) {
  std::vector<std::string> out;
  for (const auto& r : kRegimes) {
    if (std::any_of(t.rows.begin(), t.rows.end(), [&](const Row& row) { return row.regime == r; })) {
      out.push_back(r);
    }
  }
  return out;
}

std::string GeomeanTable(const Table& t, const std::vector<std::string>& regimes,
                         bool reduction = false) {
  std::string out = "| regime |";
  for (const auto& p : t.points) out += fmt::format(" {} |", p);
  out += "\n|---|";
  for (std::size_t i = 0; i < t.points.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& reg : regimes) {
    out += fmt::format("| {} |", reg);
    for (const auto& p : t.points) {
      std::vector<double> v;
      double sum = 0;
      int count = 0;
      for (const auto& r : t.rows) {
        if (r.regime != reg || r.point != p) continue;
        if (reduction) {
          if (r.reduction) {
            sum += *r.reduction;
            ++count;
          }
        } else {
          v.push_back(r.speedup);
        }
      }
      if (reduction) {
        out += count ? fmt::format(" {:.1f}% |", 100.0 * sum / count) : " - |";
      } else {
        out += v.empty() ? " - |" : fmt::format(" {:.3f} |", Geomean(v));
      }
    }
    out += "\n";
  }
  return out;
}

void Section(std::string& md, std::vector<std::string>& figs, const std::string& fig,
             const std::string& title, const std::string& body, const std::string& reference) {
  md += fmt::format("## {} analogue: {}\n\n{}\n", fig, title, body);
  if (!reference.empty()) md += fmt::format("Reference values: {}\n\n", reference);
  figs.push_back(fig);
}

}  // namespace

ReportOutput BuildReport(const std::filesystem::path& dir, bool timestamp) {
  ReportOutput out;
  if (!std::filesystem::is_directory(dir)) {
    out.missing.push_back(fmt::format("{}: no such directory", dir.string()));
    return out;
  }

  std::map<std::string, std::string> axis_of;
  const auto summary_file = dir / "summary.json";
  if (std::filesystem::exists(summary_file)) {
    try {
      std::ifstream in(summary_file);
      const auto summary = nlohmann::json::parse(in);
      for (const auto& s : summary.at("sweeps")) {
        const std::string name = s.at("name").get<std::string>();
        axis_of[name] = s.at("axis").get<std::string>();
        if (!std::filesystem::exists(dir / (name + ".csv"))) {
          out.missing.push_back(fmt::format("{}.csv (listed in summary.json)", name));
        }
      }
    } catch (const std::exception& e) {
      out.missing.push_back(fmt::format("summary.json: {}", e.what()));
    }
  }

  std::vector<std::filesystem::path> csvs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) out.missing.push_back(fmt::format("{}: no sweep CSV files", dir.string()));

  std::vector<Table> tables;
  for (const auto& f : csvs) {
    std::string error;
    auto t = ReadCsv(f, error);
    if (!t) {
      out.missing.push_back(error);
      continue;
    }
    if (t->rows.empty()) {
      out.missing.push_back(fmt::format("{}: no data rows", f.string()));
      continue;
    }
    auto it = axis_of.find(t->name);
    t->axis = it != axis_of.end() ? it->second : GuessAxis(*t);
    tables.push_back(std::move(*t));
  }

  std::string& md = out.markdown;
  md = "# Sweep report\n\n";
  if (timestamp) {
    md += fmt::format("Generated {} (unix seconds)\n\n",
                      std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count());
  }
  md += "Geometric-mean speedup per regime, normalized to each sweep's base design.\n\n";

  for (const auto& t : tables) {
    const auto regimes = RegimesIn(t);
    std::vector<std::string> dl, hpc;
    for (const auto& r : regimes) (r == "hpc" ? hpc : dl).push_back(r);
    md += fmt::format("<!-- {}.csv: {} -->\n\n", t.name, t.axis);
    if (t.axis == "dram_bw_multiplier") {
      if (!dl.empty()) {
        Section(md, out.figures, "Fig. 7", "DL speedup vs DRAM bandwidth multiplier",
                GeomeanTable(t, dl),
                "1.5x bandwidth gives up to +18% (training) and +21% (inference); gains "
                "flatten beyond 3x.");
      }
      if (!hpc.empty()) {
        Section(md, out.figures, "Fig. 3", "HPC speedup vs DRAM bandwidth multiplier",
                GeomeanTable(t, hpc),
                "geomean +5% at infinite bandwidth; -4% at 0.75x and -14% at 0.5x.");
      }
    } else if (t.axis == "llc_capacity") {
      Section(md, out.figures, "Fig. 4", "mean DRAM traffic reduction vs LLC capacity",
              GeomeanTable(t, regimes, true),
              "training: 53% at 120MB and 82% at 960MB; large-batch inference: 16x "
              "(about 94%) at 960MB; small-batch inference saturates by 240MB.");
      Section(md, out.figures, "Fig. 8", "speedup vs LLC capacity", GeomeanTable(t, regimes),
              "3840MB stays 8% (lb) and 13% (sb) short of a perfect L2 for training; "
              "inference saturates at 1920MB (lb) and 240MB (sb).");
    } else if (t.axis == "l3_link_bw") {
      Section(md, out.figures, "Fig. 9", "HBM+L3 speedup vs UHB link bandwidth",
              GeomeanTable(t, regimes),
              "2+2 comes within 3% (training) and 6% (inference) of unlimited link bandwidth.");
    } else if (t.axis == "named_designs") {
      Section(md, out.figures, "Fig. 10", "speedup of COPA-GPU designs", GeomeanTable(t, regimes),
              "training lb/sb: HBM+L3 +21%/+18%, HBML+L3 +31%/+27%, HBM+L3L about 4% below "
              "HBML+L3; inference lb: HBM+L3 +29%, HBM+L3L +40%, HBML+L3 +35%; inference sb "
              "+8-9%.");
    } else if (t.axis == "gpu_count") {
      Section(md, out.figures, "Fig. 11", "scale-out vs single COPA-GPU",
              GeomeanTable(t, regimes),
              "2x GPU-N +29%, 4x GPU-N +43%, HBML+L3 +27% on training.");
    } else {
      Section(md, out.figures, t.name, "sweep", GeomeanTable(t, regimes), "");
    }
  }
  return out;
}

}  // namespace copa

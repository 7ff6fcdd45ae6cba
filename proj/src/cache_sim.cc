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

#include "copa/cache_sim.h"

#include <algorithm>
#include <bit>
#include <ostream>

#include "copa/errors.h"
#include "fmt/format.h"

namespace copa {

LevelCounters& LevelCounters::operator+=(const LevelCounters& o) {
  accesses += o.accesses;
  hits += o.hits;
  misses += o.misses;
  writebacks += o.writebacks;
  read_accesses += o.read_accesses;
  write_accesses += o.write_accesses;
  return *this;
}

BoundaryBytes& BoundaryBytes::operator+=(const BoundaryBytes& o) {
  read_bytes += o.read_bytes;
  write_bytes += o.write_bytes;
  return *this;
}

TrafficCounts& TrafficCounts::operator+=(const TrafficCounts& o) {
  l2 += o.l2;
  l3 += o.l3;
  l2_out += o.l2_out;
  link += o.link;
  dram += o.dram;
  return *this;
}

// ---------------------------------------------------------------------------
// CacheState

CacheState::CacheState(const CacheLevelSpec& spec, bool xor_hash) : xor_hash_(xor_hash) {
  if (spec.infinite_capacity()) {
    capacity_lines_ = kInfiniteBytes;
    list_mode_ = true;
    return;
  }
  capacity_lines_ = spec.capacity / spec.line_size;
  if (capacity_lines_ == 0) return;
  if (spec.fully_associative()) {
    list_mode_ = true;
    nodes_.reserve(std::min<std::uint64_t>(capacity_lines_, 1u << 20));
    index_.reserve(std::min<std::uint64_t>(capacity_lines_, 1u << 20));
    return;
  }
  ways_ = static_cast<std::uint32_t>(std::min<std::uint64_t>(spec.associativity, capacity_lines_));
  sets_ = capacity_lines_ / ways_;
  capacity_lines_ = sets_ * ways_;
  set_bits_ = std::bit_width(sets_) - 1;
  tags_.assign(capacity_lines_, 0);
  stamps_.assign(capacity_lines_, 0);
  owners_.assign(capacity_lines_, kClean);
}

std::uint64_t CacheState::SetOf(std::uint64_t line) const {
  if (xor_hash_ && set_bits_ > 0) {
    std::uint64_t folded = 0;
    for (std::uint64_t v = line; v != 0; v >>= set_bits_) folded ^= v;
    return folded % sets_;
  }
  return line % sets_;
}

bool CacheState::Access(std::uint64_t line, bool write, std::optional<Victim>& victim,
                        std::uint32_t owner) {
  victim.reset();
  if (disabled()) return false;
  return Touch(line, write ? owner : kClean, victim);
}

void CacheState::Install(std::uint64_t line, std::optional<Victim>& victim,
                         std::uint32_t owner) {
  victim.reset();
  if (disabled()) {
    victim = Victim{line, owner};
    return;
  }
  Touch(line, owner, victim);
}

bool CacheState::Touch(std::uint64_t line, std::uint32_t owner, std::optional<Victim>& victim) {
  return list_mode_ ? TouchList(line, owner, victim) : TouchAssoc(line, owner, victim);
}

bool CacheState::TouchAssoc(std::uint64_t line, std::uint32_t owner,
                            std::optional<Victim>& victim) {
  const std::uint64_t base = SetOf(line) * ways_;
  const std::uint64_t tag = line + 1;
  std::uint64_t slot = base;
  for (std::uint64_t w = base; w < base + ways_; ++w) {
    if (tags_[w] == tag) {
      stamps_[w] = ++clock_;
      if (owner != kClean) owners_[w] = owner;
      return true;
    }
    if (stamps_[w] < stamps_[slot]) slot = w;  // invalid ways carry stamp 0
  }
  if (tags_[slot] != 0) victim = Victim{tags_[slot] - 1, owners_[slot]};
  tags_[slot] = tag;
  stamps_[slot] = ++clock_;
  owners_[slot] = owner;
  return false;
}

void CacheState::Unlink(std::uint32_t n) {
  Node& node = nodes_[n];
  if (node.prev != kNil) nodes_[node.prev].next = node.next; else head_ = node.next;
  if (node.next != kNil) nodes_[node.next].prev = node.prev; else tail_ = node.prev;
}

void CacheState::PushFront(std::uint32_t n) {
  nodes_[n].prev = kNil;
  nodes_[n].next = head_;
  if (head_ != kNil) nodes_[head_].prev = n;
  head_ = n;
  if (tail_ == kNil) tail_ = n;
}

bool CacheState::TouchList(std::uint64_t line, std::uint32_t owner,
                           std::optional<Victim>& victim) {
  auto it = index_.find(line);
  if (it != index_.end()) {
    const std::uint32_t n = it->second;
    if (owner != kClean) nodes_[n].owner = owner;
    if (head_ != n) {
      Unlink(n);
      PushFront(n);
    }
    return true;
  }
  std::uint32_t n;
  if (nodes_.size() < capacity_lines_) {
    n = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({line, kNil, kNil, owner});
  } else {
    n = tail_;
    victim = Victim{nodes_[n].line, nodes_[n].owner};
    index_.erase(nodes_[n].line);
    Unlink(n);
    nodes_[n].line = line;
    nodes_[n].owner = owner;
  }
  index_.emplace(line, n);
  PushFront(n);
  return false;
}

bool CacheState::Contains(std::uint64_t line) const { return RecencyRank(line).has_value(); }

bool CacheState::IsDirty(std::uint64_t line) const {
  if (disabled()) return false;
  if (list_mode_) {
    auto it = index_.find(line);
    return it != index_.end() && nodes_[it->second].owner != kClean;
  }
  const std::uint64_t base = SetOf(line) * ways_;
  for (std::uint64_t w = base; w < base + ways_; ++w) {
    if (tags_[w] == line + 1) return owners_[w] != kClean;
  }
  return false;
}

std::optional<std::uint64_t> CacheState::RecencyRank(std::uint64_t line) const {
  if (disabled()) return std::nullopt;
  if (list_mode_) {
    if (!index_.contains(line)) return std::nullopt;
    std::uint64_t rank = 0;
    for (std::uint32_t n = head_; nodes_[n].line != line; n = nodes_[n].next) ++rank;
    return rank;
  }
  const std::uint64_t base = SetOf(line) * ways_;
  for (std::uint64_t w = base; w < base + ways_; ++w) {
    if (tags_[w] != line + 1) continue;
    std::uint64_t rank = 0;
    for (std::uint64_t o = base; o < base + ways_; ++o) {
      if (tags_[o] != 0 && stamps_[o] > stamps_[w]) ++rank;
    }
    return rank;
  }
  return std::nullopt;
}

std::uint64_t CacheState::size() const {
  if (list_mode_) return index_.size();
  return static_cast<std::uint64_t>(
      std::count_if(tags_.begin(), tags_.end(), [](std::uint64_t t) { return t != 0; }));
}

// ---------------------------------------------------------------------------
// Level chain

namespace {

void FillBoundaries(TrafficCounts& c, std::uint32_t line, bool msm) {
  c.l2_out = {c.l2.misses * line, c.l2.writebacks * line};
  if (msm) {
    c.link = c.l2_out;
    c.dram = {c.l3.misses * line, c.l3.writebacks * line};
  } else {
    c.link = {};
    c.dram = c.l2_out;
  }
}

void Finish(TrafficReport& report) {
  report.total = {};
  for (auto& k : report.kernels) {
    FillBoundaries(k, report.line_size, report.msm_present);
    report.total += k;
  }
}

}  // namespace

TrafficReport Simulate(const Trace& trace, const CopaDesign& design, const SimOptions& options) {
  if (trace.line_size != design.l2.line_size ||
      (design.l3 && design.l3->line_size != trace.line_size)) {
    throw ContractError(fmt::format("trace line size {} does not match design line size {}",
                                    trace.line_size, design.l2.line_size));
  }
  const bool msm = design.msm_present;
  CacheState l2(design.l2, options.xor_set_hash);
  CacheLevelSpec l3_spec;
  if (msm && design.l3) l3_spec = *design.l3;
  l3_spec.capacity = msm && design.l3 ? design.l3->capacity : 0;
  CacheState l3(l3_spec, options.xor_set_hash);

  TrafficReport report;
  report.line_size = trace.line_size;
  report.msm_present = msm;
  report.kernels.resize(trace.kernels.size());

  std::optional<CacheState::Victim> v2, v3;
  for (std::size_t k = 0; k < trace.kernels.size(); ++k) {
    TrafficCounts& c = report.kernels[k];
    const auto kernel = static_cast<std::uint32_t>(k);
    ForEachLine(trace.kernels[k], trace.line_size, [&](LineAccess a) {
      ++c.l2.accesses;
      ++(a.write ? c.l2.write_accesses : c.l2.read_accesses);
      if (l2.Access(a.line, a.write, v2, kernel)) {
        ++c.l2.hits;
        return;
      }
      ++c.l2.misses;
      if (msm) {
        ++c.l3.accesses;
        ++c.l3.read_accesses;
        if (l3.Access(a.line, false, v3)) {
          ++c.l3.hits;
        } else {
          ++c.l3.misses;
        }
        if (v3 && v3->dirty()) ++report.kernels[v3->owner].l3.writebacks;
      }
      if (v2 && v2->dirty()) {
        ++report.kernels[v2->owner].l2.writebacks;
        if (msm) {
          l3.Install(v2->line, v3, v2->owner);
          if (v3 && v3->dirty()) ++report.kernels[v3->owner].l3.writebacks;
        }
      }
    });
  }
  Finish(report);
  return report;
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

// Most recently used entry at the back; each entry is (line, owner) where
// owner is the last writing kernel or -1 when clean.
class RecencyList {
 public:
  using Entry = std::pair<std::uint64_t, std::int64_t>;

  explicit RecencyList(std::uint64_t capacity_lines) : capacity_(capacity_lines) {}

  bool disabled() const { return capacity_ == 0; }

  // Returns hit; an evicted entry lands in `evicted`.
  bool Reference(std::uint64_t line, std::int64_t owner, std::optional<Entry>& evicted) {
    evicted.reset();
    for (std::size_t i = entries_.size(); i-- > 0;) {
      if (entries_[i].first != line) continue;
      const std::int64_t prior = entries_[i].second;
      entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
      entries_.emplace_back(line, owner >= 0 ? owner : prior);
      return true;
    }
    if (entries_.size() == capacity_) {
      evicted = entries_.front();
      entries_.erase(entries_.begin());
    }
    entries_.emplace_back(line, owner);
    return false;
  }

 private:
  std::uint64_t capacity_;
  std::vector<Entry> entries_;
};

}  // namespace

TrafficReport OracleSimulate(const Trace& trace, const std::vector<std::uint64_t>& capacities) {
  if (capacities.empty() || capacities.size() > 2) {
    throw ContractError("oracle takes one (L2) or two (L2, L3) capacities");
  }
  if (CountLineAccesses(trace) > 1'000'000) {
    throw ContractError("oracle trace exceeds 1e6 line accesses");
  }
  const std::uint32_t line = trace.line_size;
  auto lines_of = [&](std::uint64_t cap) { return IsInfinite(cap) ? kInfiniteBytes : cap / line; };
  const bool msm = capacities.size() == 2;
  RecencyList l2(lines_of(capacities[0]));
  RecencyList l3(msm ? lines_of(capacities[1]) : 0);

  TrafficReport report;
  report.line_size = line;
  report.msm_present = msm;
  report.kernels.resize(trace.kernels.size());
  auto& ks = report.kernels;
  for (std::size_t k = 0; k < trace.kernels.size(); ++k) {
    TrafficCounts& c = ks[k];
    for (const LineAccess& a : Expand(trace.kernels[k], line)) {
      ++c.l2.accesses;
      ++(a.write ? c.l2.write_accesses : c.l2.read_accesses);
      std::optional<RecencyList::Entry> ev2, ev3;
      const std::int64_t owner = a.write ? static_cast<std::int64_t>(k) : -1;
      if (!l2.disabled() && l2.Reference(a.line, owner, ev2)) {
        ++c.l2.hits;
        continue;
      }
      ++c.l2.misses;
      if (msm) {
        ++c.l3.accesses;
        ++c.l3.read_accesses;
        if (!l3.disabled() && l3.Reference(a.line, -1, ev3)) {
          ++c.l3.hits;
        } else {
          ++c.l3.misses;
        }
        if (ev3 && ev3->second >= 0) ++ks[ev3->second].l3.writebacks;
      }
      if (ev2 && ev2->second >= 0) {
        ++ks[ev2->second].l2.writebacks;
        if (msm) {
          if (l3.disabled()) {
            ++ks[ev2->second].l3.writebacks;
          } else {
            l3.Reference(ev2->first, ev2->second, ev3);
            if (ev3 && ev3->second >= 0) ++ks[ev3->second].l3.writebacks;
          }
        }
      }
    }
  }
  Finish(report);
  return report;
}

std::optional<double> TrafficReduction(const TrafficReport& a, const TrafficReport& b) {
  const auto base = a.total.dram.total();
  if (base == 0) return std::nullopt;
  return 1.0 - static_cast<double>(b.total.dram.total()) / static_cast<double>(base);
}

// ---------------------------------------------------------------------------
// Output

namespace {

nlohmann::json ToJson(const LevelCounters& c) {
  return {{"accesses", c.accesses}, {"hits", c.hits},
          {"misses", c.misses},     {"writebacks", c.writebacks},
          {"read_accesses", c.read_accesses}, {"write_accesses", c.write_accesses}};
}

nlohmann::json ToJson(const BoundaryBytes& b) {
  return {{"read_bytes", b.read_bytes}, {"write_bytes", b.write_bytes}};
}

}  // namespace

nlohmann::json ToJson(const TrafficCounts& c) {
  return {{"l2", ToJson(c.l2)},
          {"l3", ToJson(c.l3)},
          {"l2_out", ToJson(c.l2_out)},
          {"link", ToJson(c.link)},
          {"dram", ToJson(c.dram)}};
}

nlohmann::json ToJson(const TrafficReport& report, bool per_kernel) {
  nlohmann::json j = {{"line_size", report.line_size},
                      {"msm_present", report.msm_present},
                      {"total", ToJson(report.total)}};
  if (per_kernel) {
    auto& arr = j["kernels"] = nlohmann::json::array();
    for (const auto& k : report.kernels) arr.push_back(ToJson(k));
  }
  return j;
}

void WriteTrafficCsv(const TrafficReport& report, std::ostream& out) {
  out << "kernel_id,l2_acc,l2_hit,l3_acc,l3_hit,dram_rd_bytes,dram_wr_bytes\n";
  for (std::size_t i = 0; i < report.kernels.size(); ++i) {
    const auto& k = report.kernels[i];
    out << fmt::format("{},{},{},{},{},{},{}\n", i, k.l2.accesses, k.l2.hits, k.l3.accesses,
                       k.l3.hits, k.dram.read_bytes, k.dram.write_bytes);
  }
}

}  // namespace copa

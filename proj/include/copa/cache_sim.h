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

#ifndef COPA_CACHE_SIM_H_
#define COPA_CACHE_SIM_H_

// Functional simulation of L2 -> (UHB link) -> memory-side L3 -> DRAM.
// Both levels are LRU, write-allocate, write-back. The L3 is neither
// inclusive nor exclusive: L2 misses probe it, L3 misses fill both levels,
// and L2 dirty victims are written into it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "copa/arch_config.h"
#include "copa/workload_gen.h"
#include "json.hpp"

namespace copa {

struct LevelCounters {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;  // dirty lines sent downstream
  std::uint64_t read_accesses = 0;
  std::uint64_t write_accesses = 0;

  LevelCounters& operator+=(const LevelCounters& o);
  bool operator==(const LevelCounters&) const = default;
};

struct BoundaryBytes {
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;

  std::uint64_t total() const { return read_bytes + write_bytes; }
  BoundaryBytes& operator+=(const BoundaryBytes& o);
  bool operator==(const BoundaryBytes&) const = default;
};

struct TrafficCounts {
  LevelCounters l2;
  LevelCounters l3;
  BoundaryBytes l2_out;  // leaving the L2 (to the link or the local MC)
  BoundaryBytes link;    // crossing the UHB link; zero without an MSM
  BoundaryBytes dram;

  TrafficCounts& operator+=(const TrafficCounts& o);
  bool operator==(const TrafficCounts&) const = default;
};

struct TrafficReport {
  std::uint32_t line_size = 128;
  bool msm_present = false;
  std::vector<TrafficCounts> kernels;  // one per trace kernel
  TrafficCounts total;

  bool operator==(const TrafficReport&) const = default;
};

// Dirty lines remember the kernel that last wrote them; write-back traffic is
// charged to that kernel rather than to whichever kernel happens to evict.
//
// One LRU cache level. Set-associative levels index sets by low-order line
// bits (or an XOR fold); fully-associative and infinite levels keep a single
// recency list.
class CacheState {
 public:
  static constexpr std::uint32_t kClean = ~std::uint32_t{0};

  struct Victim {
    std::uint64_t line = 0;
    std::uint32_t owner = kClean;  // kernel that dirtied it, or kClean
    bool dirty() const { return owner != kClean; }
  };

  CacheState(const CacheLevelSpec& spec, bool xor_hash = false);

  // Looks up `line`, allocating it on a miss. Returns true on a hit. A write
  // marks the line dirty on behalf of kernel `owner`. If allocation evicts a
  // line it is stored in `victim`.
  bool Access(std::uint64_t line, bool write, std::optional<Victim>& victim,
              std::uint32_t owner = 0);

  // Writes `line` in as most recently used and dirty, allocating if absent.
  void Install(std::uint64_t line, std::optional<Victim>& victim, std::uint32_t owner = 0);

  bool Contains(std::uint64_t line) const;
  bool IsDirty(std::uint64_t line) const;
  // 0 = most recently used within its set; nullopt if absent.
  std::optional<std::uint64_t> RecencyRank(std::uint64_t line) const;
  std::uint64_t size() const;
  bool disabled() const { return capacity_lines_ == 0; }

 private:
  static constexpr std::uint32_t kNil = ~std::uint32_t{0};
  struct Node {
    std::uint64_t line;
    std::uint32_t prev, next;
    std::uint32_t owner;
  };

  std::uint64_t SetOf(std::uint64_t line) const;
  // `owner` is kClean for reads.
  bool Touch(std::uint64_t line, std::uint32_t owner, std::optional<Victim>& victim);
  bool TouchAssoc(std::uint64_t line, std::uint32_t owner, std::optional<Victim>& victim);
  bool TouchList(std::uint64_t line, std::uint32_t owner, std::optional<Victim>& victim);
  void Unlink(std::uint32_t n);
  void PushFront(std::uint32_t n);

  std::uint64_t capacity_lines_ = 0;  // kInfiniteBytes for unbounded
  bool list_mode_ = false;

  // Set-associative state.
  std::uint64_t sets_ = 0;
  std::uint32_t ways_ = 0;
  int set_bits_ = 0;
  bool xor_hash_ = false;
  std::vector<std::uint64_t> tags_;  // line + 1; 0 = invalid
  std::vector<std::uint64_t> stamps_;
  std::vector<std::uint32_t> owners_;
  std::uint64_t clock_ = 0;

  // Recency-list state.
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
  std::vector<Node> nodes_;
  std::uint32_t head_ = kNil, tail_ = kNil;
};

struct SimOptions {
  bool xor_set_hash = false;
};

// Throws ContractError if the trace and design line sizes differ.
TrafficReport Simulate(const Trace& trace, const CopaDesign& design,
                       const SimOptions& options = {});

// Brute-force reference: fully-associative LRU levels kept as explicit
// recency lists. `capacities` holds the L2 capacity and optionally the L3
// capacity (bytes; kInfiniteBytes allowed). Traces over 1e6 accesses are
// rejected with ContractError.
TrafficReport OracleSimulate(const Trace& trace, const std::vector<std::uint64_t>& capacities);

// 1 - dram(b) / dram(a); nullopt when the baseline moves no DRAM bytes.
std::optional<double> TrafficReduction(const TrafficReport& a, const TrafficReport& b);

nlohmann::json ToJson(const TrafficCounts& counts);
nlohmann::json ToJson(const TrafficReport& report, bool per_kernel = false);
// kernel_id,l2_acc,l2_hit,l3_acc,l3_hit,dram_rd_bytes,dram_wr_bytes
void WriteTrafficCsv(const TrafficReport& report, std::ostream& out);

}  // namespace copa

#endif  // COPA_CACHE_SIM_H_

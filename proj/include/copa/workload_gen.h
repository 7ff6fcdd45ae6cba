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

#ifndef COPA_WORKLOAD_GEN_H_
#define COPA_WORKLOAD_GEN_H_

// Synthetic post-L1 memory traces for DL training/inference and HPC
// streaming workloads. Traces are kept as kernel descriptors and expanded to
// line-address streams on demand.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace copa {

enum class Precision { kFp16 = 0, kFp32 = 1 };
enum class Direction { kRead, kWrite, kReadWrite };

struct AccessOrder {
  enum class Kind { kSequential, kStrided, kPseudoRandom };
  Kind kind = Kind::kSequential;
  std::uint64_t stride = 0;  // bytes; strided only
  std::uint64_t seed = 0;    // pseudo-random only

  static AccessOrder Sequential() { return {}; }
  static AccessOrder Strided(std::uint64_t stride) { return {Kind::kStrided, stride, 0}; }
  static AccessOrder PseudoRandom(std::uint64_t seed) {
    return {Kind::kPseudoRandom, 0, seed};
  }
  bool operator==(const AccessOrder&) const = default;
};

struct TensorAccess {
  std::uint32_t tensor_id = 0;
  std::uint64_t base_address = 0;
  std::uint64_t extent = 0;
  Direction direction = Direction::kRead;
  AccessOrder order;
  std::uint32_t repetitions = 1;

  bool operator==(const TensorAccess&) const = default;
};

struct KernelDescriptor {
  std::uint32_t kernel_id = 0;
  std::string name;
  std::array<double, 2> flops{};  // indexed by Precision
  std::uint64_t parallelism = 1;
  std::vector<TensorAccess> accesses;
  std::optional<std::uint32_t> dependency;

  double flops_at(Precision p) const { return flops[static_cast<int>(p)]; }
  bool operator==(const KernelDescriptor&) const = default;
};

struct Trace {
  std::string name;
  std::uint64_t batch_size = 1;
  std::uint32_t line_size = 128;
  std::vector<KernelDescriptor> kernels;
  std::uint64_t footprint = 0;  // derived; see Footprint()

  bool operator==(const Trace&) const = default;
};

struct LineAccess {
  std::uint64_t line = 0;  // line address (byte address / line_size)
  bool write = false;
  bool operator==(const LineAccess&) const = default;
};

// Bijective pseudo-random map of [0, n) onto itself keyed by `seed`.
std::uint64_t PermuteIndex(std::uint64_t index, std::uint64_t n, std::uint64_t seed);

namespace detail {
inline std::uint64_t FirstLine(const TensorAccess& a, std::uint32_t line) {
  return a.base_address / line;
}
inline std::uint64_t LastLine(const TensorAccess& a, std::uint32_t line) {
  return (a.base_address + a.extent - 1) / line;
}
}  // namespace detail

// Calls `visit(LineAccess)` for every line access of `kernel`, in order.
// Sequential order emits ascending lines, pseudo-random order a seeded
// permutation of the tensor's lines, and strided order one access per touched
// line. Read-write tensors emit a read followed by a write of each line.
template <typename Visitor>
void ForEachLine(const KernelDescriptor& kernel, std::uint32_t line_size, Visitor&& visit) {
  for (const TensorAccess& a : kernel.accesses) {
    if (a.extent == 0) continue;
    const std::uint64_t first = detail::FirstLine(a, line_size);
    const std::uint64_t n = detail::LastLine(a, line_size) - first + 1;
    auto emit = [&](std::uint64_t line) {
      if (a.direction == Direction::kReadWrite) {
        visit(LineAccess{line, false});
        visit(LineAccess{line, true});
      } else {
        visit(LineAccess{line, a.direction == Direction::kWrite});
      }
    };
    for (std::uint32_t rep = 0; rep < a.repetitions; ++rep) {
      switch (a.order.kind) {
        case AccessOrder::Kind::kSequential:
          for (std::uint64_t k = 0; k < n; ++k) emit(first + k);
          break;
        case AccessOrder::Kind::kPseudoRandom:
          for (std::uint64_t k = 0; k < n; ++k) emit(first + PermuteIndex(k, n, a.order.seed));
          break;
        case AccessOrder::Kind::kStrided: {
          std::uint64_t previous = ~std::uint64_t{0};
          for (std::uint64_t off = 0; off < a.extent; off += a.order.stride) {
            const std::uint64_t line = (a.base_address + off) / line_size;
            if (line != previous) emit(line);
            previous = line;
          }
          break;
        }
      }
    }
  }
}

// Materialized form of ForEachLine.
std::vector<LineAccess> Expand(const KernelDescriptor& kernel, std::uint32_t line_size);

// Number of line accesses ForEachLine would emit.
std::uint64_t CountLineAccesses(const KernelDescriptor& kernel, std::uint32_t line_size);
std::uint64_t CountLineAccesses(const Trace& trace);

// Bytes in the union of all line-aligned ranges the trace touches.
std::uint64_t Footprint(const Trace& trace);

// Recomputes trace.footprint and checks structural invariants.
void FinalizeTrace(Trace& trace);

// ---------------------------------------------------------------------------
// DL models

enum class Mode { kTraining, kInference };
enum class ReuseClass { kWeightsReusedAcrossBatch, kActivationsStreamed };

std::string_view ToString(Mode m);
Mode ParseMode(std::string_view s);

struct LayerSpec {
  std::string name;
  std::uint64_t weight_bytes = 0;
  std::uint64_t activation_bytes_per_sample = 0;
  double flops_per_sample = 0;
  Precision precision = Precision::kFp16;
  ReuseClass reuse_class = ReuseClass::kWeightsReusedAcrossBatch;
  // Independent work units (thread-block tiles) per sample.
  double work_units_per_sample = 1;
  // Embedding-style tables are gathered in pseudo-random order.
  bool gathered_weights = false;
};

struct DlModelSpec {
  std::string name;
  Mode mode = Mode::kTraining;
  std::uint64_t input_bytes_per_sample = 0;
  std::vector<LayerSpec> layers;
  // Optimizer state bytes per weight byte (momentum = 1, Adam = 2).
  double optimizer_state_multiplier = 1.0;
  // GEMM weights are re-read once per `batch_tile` samples, up to
  // `max_weight_passes` times per kernel.
  std::uint32_t batch_tile = 64;
  std::uint32_t max_weight_passes = 4;
};

// Calibration anchors for a preset: footprints at a small and a large
// per-GPU batch.
struct DlPresetInfo {
  std::string name;
  Mode mode;
  std::uint64_t small_batch;
  double small_footprint;  // bytes
  std::uint64_t large_batch;
  double large_footprint;  // bytes
};

const std::vector<DlPresetInfo>& DlPresetCatalog();
const DlPresetInfo& DlPresetInfoFor(std::string_view name, Mode mode);

// Throws UnknownPresetError for names/modes outside the catalog.
DlModelSpec DlPreset(std::string_view name, Mode mode);

// One end-to-end iteration: forward kernels in layer order, then (training
// only) a loss kernel, backward-data and weight-gradient kernels in reverse
// layer order, and a fused optimizer update.
Trace GenDlTrace(const DlModelSpec& model, std::uint64_t batch, std::uint64_t seed,
                 std::uint32_t line_size = 128);

// Streaming HPC kernels: each re-reads a resident subset of
// `reuse_fraction x working_set` and streams its own slice of the rest.
Trace GenHpcTrace(std::uint64_t working_set, double reuse_fraction, double flop_byte_ratio,
                  std::uint32_t kernels, std::uint64_t seed, std::uint32_t line_size = 128);

// ---------------------------------------------------------------------------
// JSONL trace files: a header record then one kernel per line.

inline constexpr int kTraceSchemaVersion = 1;

void WriteTraceJsonl(const Trace& trace, std::ostream& out);
Trace ReadTraceJsonl(std::istream& in);  // throws ParseError

}  // namespace copa

#endif  // COPA_WORKLOAD_GEN_H_

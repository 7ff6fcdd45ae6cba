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

#include "copa/workload_gen.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "copa/errors.h"
#include "copa/units.h"
#include "fmt/format.h"
#include "json.hpp"

namespace copa {

// ---------------------------------------------------------------------------
// Expansion

namespace {

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

// Four-round Feistel network over the smallest even-width power-of-two domain
// covering n, with cycle walking back into [0, n).
std::uint64_t PermuteIndex(std::uint64_t index, std::uint64_t n, std::uint64_t seed) {
  if (n <= 1) return 0;
  int bits = 2;
  while (bits < 64 && (std::uint64_t{1} << bits) < n) ++bits;
  if (bits % 2) ++bits;
  const int half = bits / 2;
  const std::uint64_t mask = (std::uint64_t{1} << half) - 1;
  std::uint64_t state = seed;
  std::array<std::uint64_t, 4> keys{};
  for (auto& k : keys) k = SplitMix64(state);

  std::uint64_t x = index;
  do {
    std::uint64_t left = x >> half;
    std::uint64_t right = x & mask;
    for (std::uint64_t key : keys) {
      std::uint64_t mix = right ^ key;
      mix *= 0xff51afd7ed558ccdULL;
      mix ^= mix >> 29;
      const std::uint64_t next = left ^ (mix & mask);
      left = right;
      right = next;
    }
    x = (left << half) | right;
  } while (x >= n);
  return x;
}

std::vector<LineAccess> Expand(const KernelDescriptor& kernel, std::uint32_t line_size) {
  std::vector<LineAccess> out;
  out.reserve(CountLineAccesses(kernel, line_size));
  ForEachLine(kernel, line_size, [&](LineAccess a) { out.push_back(a); });
  return out;
}

namespace {

// A strided access need not reach the end of its extent.
std::uint64_t StridedLastLine(const TensorAccess& a, std::uint32_t line) {
  return (a.base_address + (a.extent - 1) / a.order.stride * a.order.stride) / line;
}

}  // namespace

std::uint64_t CountLineAccesses(const KernelDescriptor& kernel, std::uint32_t line_size) {
  std::uint64_t total = 0;
  for (const TensorAccess& a : kernel.accesses) {
    if (a.extent == 0) continue;
    std::uint64_t lines = 0;
    if (a.order.kind == AccessOrder::Kind::kStrided && a.order.stride > line_size) {
      lines = (a.extent - 1) / a.order.stride + 1;
    } else if (a.order.kind == AccessOrder::Kind::kStrided) {
      lines = StridedLastLine(a, line_size) - detail::FirstLine(a, line_size) + 1;
    } else {
      lines = detail::LastLine(a, line_size) - detail::FirstLine(a, line_size) + 1;
    }
    const std::uint64_t per_line = a.direction == Direction::kReadWrite ? 2 : 1;
    total += lines * per_line * a.repetitions;
  }
  return total;
}

std::uint64_t CountLineAccesses(const Trace& trace) {
  std::uint64_t total = 0;
  for (const auto& k : trace.kernels) total += CountLineAccesses(k, trace.line_size);
  return total;
}

std::uint64_t Footprint(const Trace& trace) {
  const std::uint32_t line = trace.line_size;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;  // [first, last] lines
  for (const auto& k : trace.kernels) {
    for (const auto& a : k.accesses) {
      if (a.extent == 0) continue;
      if (a.order.kind == AccessOrder::Kind::kStrided && a.order.stride > line) {
        for (std::uint64_t off = 0; off < a.extent; off += a.order.stride) {
          const std::uint64_t l = (a.base_address + off) / line;
          ranges.emplace_back(l, l);
        }
      } else if (a.order.kind == AccessOrder::Kind::kStrided) {
        ranges.emplace_back(detail::FirstLine(a, line), StridedLastLine(a, line));
      } else {
        ranges.emplace_back(detail::FirstLine(a, line), detail::LastLine(a, line));
      }
    }
  }
  std::sort(ranges.begin(), ranges.end());
  std::uint64_t lines = 0;
  std::uint64_t cur_first = 0, cur_last = 0;
  bool open = false;
  for (const auto& [first, last] : ranges) {
    if (open && first <= cur_last + 1) {
      cur_last = std::max(cur_last, last);
      continue;
    }
    if (open) lines += cur_last - cur_first + 1;
    cur_first = first;
    cur_last = last;
    open = true;
  }
  if (open) lines += cur_last - cur_first + 1;
  return lines * line;
}

void FinalizeTrace(Trace& trace) {
  if (!IsPowerOfTwo(trace.line_size)) {
    throw ContractError("trace line_size must be a power of two");
  }
  for (const auto& k : trace.kernels) {
    if (k.parallelism < 1) {
      throw ContractError(fmt::format("kernel {}: parallelism must be >= 1", k.kernel_id));
    }
    if (k.accesses.empty() && k.flops[0] == 0 && k.flops[1] == 0) {
      throw ContractError(fmt::format("kernel {}: no accesses and no flops", k.kernel_id));
    }
    for (const auto& a : k.accesses) {
      if (a.extent == 0) {
        throw ContractError(fmt::format("kernel {}: tensor {} has zero extent", k.kernel_id,
                                        a.tensor_id));
      }
      if (a.order.kind == AccessOrder::Kind::kStrided && a.order.stride == 0) {
        throw ContractError(fmt::format("kernel {}: strided access needs a stride",
                                        k.kernel_id));
      }
    }
  }
  trace.footprint = Footprint(trace);
}

// ---------------------------------------------------------------------------
// DL presets

std::string_view ToString(Mode m) { return m == Mode::kTraining ? "training" : "inference"; }

Mode ParseMode(std::string_view s) {
  if (s == "training" || s == "train") return Mode::kTraining;
  if (s == "inference" || s == "infer") return Mode::kInference;
  throw std::invalid_argument(fmt::format("unknown mode '{}'", s));
}

namespace {

// Work-unit capacity of the GPU the presets are sized against (134 SMs x 32).
// Every layer just over-fills it at the large reference batch, so halving
// the batch costs utilization.
constexpr double kReferenceWorkCapacity = 134.0 * 32.0;
constexpr double kLargeBatchFill = 1.1;

struct LayerShape {
  std::string name;
  double weight = 0;      // relative weight bytes
  double activation = 0;  // relative output bytes per sample
  double flops = 0;       // relative forward FLOPs per sample
  ReuseClass reuse = ReuseClass::kWeightsReusedAcrossBatch;
  Precision precision = Precision::kFp16;
  bool gathered = false;
};

LayerShape Gemm(std::string name, double w, double a, double f) {
  return {std::move(name), w, a, f, ReuseClass::kWeightsReusedAcrossBatch, Precision::kFp16,
          false};
}
LayerShape Stream(std::string name, double a, double f) {
  return {std::move(name), 0, a, f, ReuseClass::kActivationsStreamed, Precision::kFp32, false};
}
LayerShape Gather(std::string name, double w, double a) {
  return {std::move(name), w, a, 0.001, ReuseClass::kActivationsStreamed, Precision::kFp32,
          true};
}

// Convolutional backbone: per stage, activations shrink by 2x and weights grow
// by `weight_growth`. Each block is a conv followed by a fused BN/ReLU pass.
std::vector<LayerShape> ConvNet(const std::vector<int>& blocks, double weight_growth) {
  std::vector<LayerShape> layers;
  layers.push_back(Gemm("stem", 0.02, 4.0, 0.5));
  double act = 4.0, w = 0.25;
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    for (int b = 0; b < blocks[s]; ++b) {
      const std::string tag = fmt::format("s{}b{}", s, b);
      layers.push_back(Gemm("conv_" + tag, w, act, 1.0));
      layers.push_back(Stream("bnrelu_" + tag, act, 0.01));
    }
    act /= 2.0;
    w *= weight_growth;
  }
  return layers;
}

struct PresetShape {
  double input = 0;  // relative input bytes per sample
  std::vector<LayerShape> layers;
  double forward_gflop = 0;  // per sample
  double optimizer_multiplier = 1.0;
};

PresetShape ShapeFor(std::string_view name, Mode mode) {
  PresetShape p;
  const bool train = mode == Mode::kTraining;
  if (name == "resnet") {
    p.input = 0.4;
    p.layers = ConvNet({3, 4, 6, 3}, 4.0);
    p.layers.push_back(Gemm("fc", 4.0, 0.01, 0.05));
    p.forward_gflop = train ? 14.0 : 4.0;
  } else if (name == "ssd") {
    p.input = 0.6;
    p.layers = ConvNet({3, 4, 6}, 4.0);
    for (int i = 0; i < 4; ++i) {
      p.layers.push_back(Gemm(fmt::format("extra{}", i), 2.0, 0.5, 0.6));
      p.layers.push_back(Gemm(fmt::format("head{}", i), 0.5, 0.8, 0.4));
    }
    p.forward_gflop = train ? 24.0 : 3.0;
  } else if (name == "maskrcnn") {
    p.input = 1.0;
    p.layers = ConvNet({3, 4, 6, 3}, 4.0);
    for (int i = 0; i < 4; ++i) p.layers.push_back(Gemm(fmt::format("fpn{}", i), 1.0, 2.0, 1.5));
    for (int i = 0; i < 3; ++i) {
      p.layers.push_back(Gemm(fmt::format("roi_head{}", i), 4.0, 1.0, 1.0));
      p.layers.push_back(Stream(fmt::format("roi_align{}", i), 1.0, 0.02));
    }
    p.forward_gflop = 600.0;
  } else if (name == "gnmt") {
    p.input = 0.02;
    p.layers.push_back(Gather("embedding", 20.0, 0.5));
    for (int i = 0; i < 8; ++i) {
      p.layers.push_back(Gemm(fmt::format("lstm{}", i), 2.0, 1.0, 1.0));
      p.layers.push_back(Stream(fmt::format("gates{}", i), 1.0, 0.02));
    }
    p.layers.push_back(Gemm("attention", 0.5, 1.0, 0.3));
    p.layers.push_back(Gemm("projection", 20.0, 6.0, 2.5));
    p.layers.push_back(Stream("softmax", 6.0, 0.05));
    p.forward_gflop = train ? 14.0 : 8.0;
    p.optimizer_multiplier = 2.0;
  } else if (name == "transformer") {
    p.input = 0.01;
    p.layers.push_back(Gather("embedding", 10.0, 1.0));
    for (int i = 0; i < 12; ++i) {
      p.layers.push_back(Gemm(fmt::format("attn{}", i), 1.0, 1.0, 1.0));
      p.layers.push_back(Stream(fmt::format("softmax{}", i), 2.0, 0.05));
      p.layers.push_back(Gemm(fmt::format("ffn{}", i), 2.0, 1.0, 2.0));
      p.layers.push_back(Stream(fmt::format("layernorm{}", i), 1.0, 0.02));
    }
    p.layers.push_back(Gemm("projection", 10.0, 3.0, 2.0));
    p.forward_gflop = 0.4;
    p.optimizer_multiplier = 2.0;
  } else if (name == "ncf") {
    p.input = 0.02;
    p.layers.push_back(Gather("user_embedding", 30.0, 0.25));
    p.layers.push_back(Gather("item_embedding", 6.0, 0.25));
    const double widths[] = {1.0, 0.5, 0.25, 0.1};
    for (int i = 0; i < 4; ++i) {
      p.layers.push_back(Gemm(fmt::format("mlp{}", i), 0.2 / (1 << i), widths[i], widths[i]));
      p.layers.push_back(Stream(fmt::format("relu{}", i), widths[i], 0.01));
    }
    p.forward_gflop = 0.0008;
    p.optimizer_multiplier = 2.0;
  } else if (name == "mobilenet") {
    p.input = 0.3;
    p.layers = ConvNet({1, 2, 3, 4, 3, 3, 1}, 2.0);
    p.layers.push_back(Gemm("fc", 2.0, 0.01, 0.05));
    p.forward_gflop = 1.2;
  }
  return p;
}

}  // namespace

const std::vector<DlPresetInfo>& DlPresetCatalog() {
  // Footprint anchors (decimal bytes) at the small and large per-GPU batch.
  static const std::vector<DlPresetInfo> catalog = {
      {"resnet", Mode::kTraining, 12, 989e6, 128, 6.0e9},
      {"ssd", Mode::kTraining, 4, 559e6, 128, 7.9e9},
      {"maskrcnn", Mode::kTraining, 1, 2.1e9, 6, 9.9e9},
      {"gnmt", Mode::kTraining, 32, 3.0e9, 256, 8.3e9},
      {"transformer", Mode::kTraining, 640, 4.5e9, 5120, 7.9e9},
      {"ncf", Mode::kTraining, 65526, 657e6, 1048576, 4.5e9},
      {"resnet", Mode::kInference, 1, 49e6, 232, 1.1e9},
      {"mobilenet", Mode::kInference, 1, 16e6, 704, 2.0e9},
      {"ssd", Mode::kInference, 1, 24e6, 288, 2.0e9},
      {"gnmt", Mode::kInference, 1, 300e6, 128, 961e6},
  };
  return catalog;
}

const DlPresetInfo& DlPresetInfoFor(std::string_view name, Mode mode) {
  for (const auto& info : DlPresetCatalog()) {
    if (info.name == name && info.mode == mode) return info;
  }
  std::string valid;
  for (const auto& info : DlPresetCatalog()) {
    valid += fmt::format("{}{}/{}", valid.empty() ? "" : ", ", info.name, ToString(info.mode));
  }
  throw UnknownPresetError(
      fmt::format("no such workload preset '{}/{}' (valid: {})", name, ToString(mode), valid));
}

DlModelSpec DlPreset(std::string_view name, Mode mode) {
  const DlPresetInfo& info = DlPresetInfoFor(name, mode);
  const PresetShape shape = ShapeFor(name, mode);
  const bool train = mode == Mode::kTraining;

  // Footprint is static + batch x per_sample; solve both from the anchors.
  const double per_sample = (info.large_footprint - info.small_footprint) /
                            static_cast<double>(info.large_batch - info.small_batch);
  const double fixed = info.small_footprint - per_sample * static_cast<double>(info.small_batch);

  double weight_rel = 0, act_rel = shape.input, act_max = 0, flop_rel = 0;
  for (const auto& l : shape.layers) {
    weight_rel += l.weight;
    act_rel += l.activation;
    act_max = std::max(act_max, l.activation);
    flop_rel += l.flops;
  }
  // Training also keeps gradients and optimizer state for every weight, and two
  // activation-gradient buffers sized to the largest activation.
  const double weight_copies = train ? 2.0 + shape.optimizer_multiplier : 1.0;
  const double weight_scale = fixed / weight_copies / weight_rel;
  const double act_scale = per_sample / (act_rel + (train ? 2.0 * act_max : 0.0));

  const double units_per_sample = kLargeBatchFill * kReferenceWorkCapacity /
                                  static_cast<double>(info.large_batch);

  DlModelSpec model;
  model.name = info.name;
  model.mode = mode;
  model.optimizer_state_multiplier = shape.optimizer_multiplier;
  model.input_bytes_per_sample = static_cast<std::uint64_t>(std::llround(shape.input * act_scale));
  for (const auto& l : shape.layers) {
    LayerSpec spec;
    spec.name = l.name;
    spec.weight_bytes = static_cast<std::uint64_t>(std::llround(l.weight * weight_scale));
    spec.activation_bytes_per_sample =
        static_cast<std::uint64_t>(std::llround(l.activation * act_scale));
    spec.flops_per_sample = shape.forward_gflop * 1e9 * l.flops / flop_rel;
    spec.precision = l.precision;
    spec.reuse_class = l.reuse;
    spec.gathered_weights = l.gathered;
    spec.work_units_per_sample = units_per_sample;
    model.layers.push_back(std::move(spec));
  }
  return model;
}

namespace {

constexpr std::uint64_t kTensorAlignment = 64 * kKiB;

class TraceBuilder {
 public:
  explicit TraceBuilder(std::uint32_t line_size) { trace_.line_size = line_size; }

  // Reserves an address range; returns the tensor id.
  std::uint32_t Allocate(std::uint64_t bytes) {
    const std::uint32_t id = static_cast<std::uint32_t>(bases_.size());
    bases_.push_back(next_);
    extents_.push_back(bytes);
    next_ += (std::max<std::uint64_t>(bytes, 1) + kTensorAlignment - 1) / kTensorAlignment *
             kTensorAlignment;
    return id;
  }

  TensorAccess Access(std::uint32_t tensor, Direction dir, std::uint32_t reps = 1,
                      AccessOrder order = AccessOrder::Sequential(),
                      std::optional<std::uint64_t> extent = std::nullopt) const {
    TensorAccess a;
    a.tensor_id = tensor;
    a.base_address = bases_[tensor];
    a.extent = extent.value_or(extents_[tensor]);
    a.direction = dir;
    a.order = order;
    a.repetitions = reps;
    return a;
  }

  void AddKernel(std::string name, Precision precision, double flops, std::uint64_t parallelism,
                 std::vector<TensorAccess> accesses, double fp32_flops = 0) {
    KernelDescriptor k;
    k.kernel_id = static_cast<std::uint32_t>(trace_.kernels.size());
    k.name = std::move(name);
    k.flops[static_cast<int>(precision)] += flops;
    k.flops[static_cast<int>(Precision::kFp32)] += fp32_flops;
    k.parallelism = std::max<std::uint64_t>(1, parallelism);
    std::erase_if(accesses, [](const TensorAccess& a) { return a.extent == 0; });
    k.accesses = std::move(accesses);
    if (k.kernel_id > 0) k.dependency = k.kernel_id - 1;
    trace_.kernels.push_back(std::move(k));
  }

  Trace Finish(std::string name, std::uint64_t batch) {
    trace_.name = std::move(name);
    trace_.batch_size = batch;
    FinalizeTrace(trace_);
    return std::move(trace_);
  }

 private:
  Trace trace_;
  std::vector<std::uint64_t> bases_;
  std::vector<std::uint64_t> extents_;
  std::uint64_t next_ = 0;
};

}  // namespace

Trace GenDlTrace(const DlModelSpec& model, std::uint64_t batch, std::uint64_t seed,
                 std::uint32_t line_size) {
  if (batch < 1) throw ContractError("batch must be >= 1");
  if (model.layers.empty()) throw ContractError("model needs at least one layer");
  const bool train = model.mode == Mode::kTraining;
  const std::size_t n = model.layers.size();
  const double b = static_cast<double>(batch);

  TraceBuilder tb(line_size);
  std::uint64_t seed_state = seed;

  // Parameters and (training) gradient/optimizer state.
  std::vector<std::optional<std::uint32_t>> weights(n), grads(n), states(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = model.layers[i];
    if (l.weight_bytes == 0) continue;
    weights[i] = tb.Allocate(l.weight_bytes);
    if (train) {
      grads[i] = tb.Allocate(l.weight_bytes);
      const auto state_bytes = static_cast<std::uint64_t>(
          std::llround(static_cast<double>(l.weight_bytes) * model.optimizer_state_multiplier));
      if (state_bytes > 0) states[i] = tb.Allocate(state_bytes);
    }
  }

  // acts[0] is the input batch; acts[i] the output of layer i-1.
  std::vector<std::uint32_t> acts(n + 1);
  acts[0] = tb.Allocate(model.input_bytes_per_sample * batch);
  std::uint64_t max_act = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bytes = model.layers[i].activation_bytes_per_sample * batch;
    acts[i + 1] = tb.Allocate(bytes);
    max_act = std::max(max_act, bytes);
  }
  std::array<std::uint32_t, 2> grad_buf{};
  if (train) {
    grad_buf[0] = tb.Allocate(max_act);
    grad_buf[1] = tb.Allocate(max_act);
  }

  const std::uint32_t passes = static_cast<std::uint32_t>(std::clamp<std::uint64_t>(
      (batch + model.batch_tile - 1) / model.batch_tile, 1, model.max_weight_passes));
  auto parallelism = [&](const LayerSpec& l) {
    return static_cast<std::uint64_t>(std::ceil(b * l.work_units_per_sample));
  };
  auto weight_read = [&](std::size_t i) -> std::vector<TensorAccess> {
    if (!weights[i]) return {};
    const auto& l = model.layers[i];
    if (l.gathered_weights) {
      return {tb.Access(*weights[i], Direction::kRead, 1,
                        AccessOrder::PseudoRandom(SplitMix64(seed_state)))};
    }
    return {tb.Access(*weights[i], Direction::kRead,
                      l.reuse_class == ReuseClass::kWeightsReusedAcrossBatch ? passes : 1)};
  };
  auto act_bytes = [&](std::size_t idx) {
    return idx == 0 ? model.input_bytes_per_sample * batch
                    : model.layers[idx - 1].activation_bytes_per_sample * batch;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = model.layers[i];
    auto acc = weight_read(i);
    acc.push_back(tb.Access(acts[i], Direction::kRead));
    acc.push_back(tb.Access(acts[i + 1], Direction::kWrite));
    tb.AddKernel("fwd_" + l.name, l.precision, l.flops_per_sample * b, parallelism(l),
                 std::move(acc));
  }

  if (train) {
    const std::uint64_t out_bytes = act_bytes(n);
    tb.AddKernel("loss", Precision::kFp32, 4.0 * static_cast<double>(out_bytes),
                 parallelism(model.layers[n - 1]),
                 {tb.Access(acts[n], Direction::kRead),
                  tb.Access(grad_buf[n % 2], Direction::kWrite, 1, AccessOrder::Sequential(),
                            out_bytes)});

    for (std::size_t idx = n; idx >= 1; --idx) {
      const std::size_t i = idx - 1;
      const auto& l = model.layers[i];
      const std::uint32_t g_in = grad_buf[idx % 2];
      const std::uint32_t g_out = grad_buf[(idx - 1) % 2];
      const std::uint64_t g_in_bytes = act_bytes(idx);

      std::vector<TensorAccess> acc;
      acc.push_back(tb.Access(g_in, Direction::kRead, 1, AccessOrder::Sequential(), g_in_bytes));
      acc.push_back(tb.Access(acts[idx], Direction::kRead));
      if (!l.gathered_weights) {
        for (auto& w : weight_read(i)) acc.push_back(w);
      }
      if (idx > 1) {
        acc.push_back(tb.Access(g_out, Direction::kWrite, 1, AccessOrder::Sequential(),
                                act_bytes(idx - 1)));
      }
      tb.AddKernel("bwd_" + l.name, l.precision, l.flops_per_sample * b, parallelism(l),
                   std::move(acc));

      if (grads[i]) {
        std::vector<TensorAccess> wg;
        wg.push_back(tb.Access(g_in, Direction::kRead, 1, AccessOrder::Sequential(), g_in_bytes));
        wg.push_back(tb.Access(acts[i], Direction::kRead));
        wg.push_back(tb.Access(*grads[i], Direction::kWrite, 1,
                               l.gathered_weights
                                   ? AccessOrder::PseudoRandom(SplitMix64(seed_state))
                                   : AccessOrder::Sequential()));
        tb.AddKernel("wgrad_" + l.name, l.precision, l.flops_per_sample * b, parallelism(l),
                     std::move(wg));
      }
    }

    std::vector<TensorAccess> opt;
    double params = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!weights[i]) continue;
      opt.push_back(tb.Access(*grads[i], Direction::kRead));
      opt.push_back(tb.Access(*weights[i], Direction::kReadWrite));
      if (states[i]) opt.push_back(tb.Access(*states[i], Direction::kReadWrite));
      params += static_cast<double>(model.layers[i].weight_bytes);
    }
    if (!opt.empty()) {
      tb.AddKernel("optimizer", Precision::kFp32, 4.0 * params,
                   static_cast<std::uint64_t>(params / (16.0 * kKiB)), std::move(opt));
    }
  }

  return tb.Finish(fmt::format("{}-{}-b{}", model.name, ToString(model.mode), batch), batch);
}

Trace GenHpcTrace(std::uint64_t working_set, double reuse_fraction, double flop_byte_ratio,
                  std::uint32_t kernels, std::uint64_t seed, std::uint32_t line_size) {
  if (working_set == 0) throw ContractError("working_set must be positive");
  if (kernels < 1) throw ContractError("kernels must be >= 1");
  if (!(reuse_fraction >= 0 && reuse_fraction <= 1)) {
    throw ContractError("reuse_fraction must be in [0, 1]");
  }
  if (!(flop_byte_ratio >= 0)) throw ContractError("flop_byte_ratio must be non-negative");

  TraceBuilder tb(line_size);
  const auto resident =
      static_cast<std::uint64_t>(std::llround(reuse_fraction * static_cast<double>(working_set)));
  const std::uint64_t streamed = working_set - resident;
  const std::uint64_t slice = streamed / kernels;

  // The resident set and the streamed slices are laid out back to back so the
  // working set is one contiguous range.
  std::optional<std::uint32_t> resident_id;
  if (resident > 0) resident_id = tb.Allocate(resident);
  std::vector<std::uint32_t> slices;
  if (slice > 0) {
    for (std::uint32_t k = 0; k < kernels; ++k) slices.push_back(tb.Allocate(slice));
  }

  for (std::uint32_t k = 0; k < kernels; ++k) {
    std::vector<TensorAccess> acc;
    std::uint64_t bytes = 0;
    if (resident_id) {
      acc.push_back(tb.Access(*resident_id, Direction::kRead, 2));
      bytes += 2 * resident;
    }
    if (!slices.empty()) {
      // Each kernel streams a distinct slice; the seed picks the visiting order.
      const std::uint32_t s = static_cast<std::uint32_t>(PermuteIndex(k, kernels, seed));
      const std::uint64_t in_bytes = slice / 3 * 2;
      TensorAccess in = tb.Access(slices[s], Direction::kRead, 1, AccessOrder::Sequential(),
                                  std::max<std::uint64_t>(in_bytes, 1));
      acc.push_back(in);
      if (slice > in_bytes) {
        TensorAccess out = tb.Access(slices[s], Direction::kWrite);
        out.base_address += in_bytes;
        out.extent = slice - in_bytes;
        acc.push_back(out);
      }
      bytes += slice;
    }
    if (acc.empty()) continue;
    tb.AddKernel(fmt::format("hpc_k{}", k), Precision::kFp32,
                 flop_byte_ratio * static_cast<double>(bytes),
                 std::max<std::uint64_t>(1, bytes / (8 * kKiB)), std::move(acc));
  }

  const double ws_mb = static_cast<double>(working_set) / static_cast<double>(kMiB);
  return tb.Finish(
      fmt::format("hpc-ws{:g}MB-r{:g}-i{:g}-k{}", ws_mb, reuse_fraction, flop_byte_ratio, kernels),
      1);
}

// ---------------------------------------------------------------------------
// JSONL IO

namespace {

using nlohmann::json;

std::string_view ToString(Direction d) {
  switch (d) {
    case Direction::kRead: return "read";
    case Direction::kWrite: return "write";
    case Direction::kReadWrite: return "read_write";
  }
  return "?";
}

json OrderToJson(const AccessOrder& o) {
  switch (o.kind) {
    case AccessOrder::Kind::kSequential: return "sequential";
    case AccessOrder::Kind::kStrided: return json{{"strided", o.stride}};
    case AccessOrder::Kind::kPseudoRandom: return json{{"pseudo_random", o.seed}};
  }
  return nullptr;
}

template <typename T>
T Get(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key, "missing required field");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(path + "." + key, e.what());
  }
}

AccessOrder OrderFromJson(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "sequential") return AccessOrder::Sequential();
  if (j.is_object() && j.contains("strided")) {
    return AccessOrder::Strided(Get<std::uint64_t>(j, "strided", path));
  }
  if (j.is_object() && j.contains("pseudo_random")) {
    return AccessOrder::PseudoRandom(Get<std::uint64_t>(j, "pseudo_random", path));
  }
  throw ParseError(path, "expected \"sequential\", {\"strided\": n} or {\"pseudo_random\": seed}");
}

Direction DirectionFromJson(const std::string& s, const std::string& path) {
  if (s == "read") return Direction::kRead;
  if (s == "write") return Direction::kWrite;
  if (s == "read_write") return Direction::kReadWrite;
  throw ParseError(path, "unknown direction '" + s + "'");
}

}  // namespace

void WriteTraceJsonl(const Trace& trace, std::ostream& out) {
  json header = {{"name", trace.name},
                 {"batch_size", trace.batch_size},
                 {"line_size", trace.line_size},
                 {"schema_version", kTraceSchemaVersion}};
  out << header.dump() << '\n';
  for (const auto& k : trace.kernels) {
    json j;
    j["kernel_id"] = k.kernel_id;
    j["name"] = k.name;
    j["flops"] = {{"fp16", k.flops_at(Precision::kFp16)}, {"fp32", k.flops_at(Precision::kFp32)}};
    j["parallelism"] = k.parallelism;
    j["dependency"] = k.dependency ? json(*k.dependency) : json(nullptr);
    json accesses = json::array();
    for (const auto& a : k.accesses) {
      accesses.push_back({{"tensor_id", a.tensor_id},
                          {"base_address", a.base_address},
                          {"extent", a.extent},
                          {"direction", ToString(a.direction)},
                          {"order", OrderToJson(a.order)},
                          {"repetitions", a.repetitions}});
    }
    j["accesses"] = std::move(accesses);
    out << j.dump() << '\n';
  }
}

Trace ReadTraceJsonl(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = fmt::format("line {}", line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, e.what());
    }
    if (!have_header) {
      const int version = Get<int>(j, "schema_version", path);
      if (version != kTraceSchemaVersion) {
        throw ParseError(path + ".schema_version",
                         fmt::format("unsupported version {}", version));
      }
      trace.name = Get<std::string>(j, "name", path);
      trace.batch_size = Get<std::uint64_t>(j, "batch_size", path);
      trace.line_size = Get<std::uint32_t>(j, "line_size", path);
      have_header = true;
      continue;
    }
    KernelDescriptor k;
    k.kernel_id = Get<std::uint32_t>(j, "kernel_id", path);
    k.name = j.value("name", "");
    if (auto f = j.find("flops"); f != j.end()) {
      k.flops[0] = f->value("fp16", 0.0);
      k.flops[1] = f->value("fp32", 0.0);
    }
    k.parallelism = Get<std::uint64_t>(j, "parallelism", path);
    if (auto d = j.find("dependency"); d != j.end() && !d->is_null()) {
      k.dependency = d->get<std::uint32_t>();
    }
    const auto& accesses = j.find("accesses");
    if (accesses == j.end() || !accesses->is_array()) {
      throw ParseError(path + ".accesses", "expected an array");
    }
    for (std::size_t i = 0; i < accesses->size(); ++i) {
      const json& a = (*accesses)[i];
      const std::string apath = fmt::format("{}.accesses[{}]", path, i);
      TensorAccess t;
      t.tensor_id = Get<std::uint32_t>(a, "tensor_id", apath);
      t.base_address = Get<std::uint64_t>(a, "base_address", apath);
      t.extent = Get<std::uint64_t>(a, "extent", apath);
      t.direction = DirectionFromJson(Get<std::string>(a, "direction", apath), apath + ".direction");
      t.order = a.contains("order") ? OrderFromJson(a["order"], apath + ".order")
                                    : AccessOrder::Sequential();
      t.repetitions = a.value("repetitions", 1u);
      k.accesses.push_back(t);
    }
    trace.kernels.push_back(std::move(k));
  }
  if (!have_header) throw ParseError("line 1", "missing trace header record");
  try {
    FinalizeTrace(trace);
  } catch (const ContractError& e) {
    throw ParseError("trace", e.what());
  }
  return trace;
}

}  // namespace copa

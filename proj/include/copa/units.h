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

#ifndef COPA_UNITS_H_
#define COPA_UNITS_H_

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace copa {

// Storage capacities use binary prefixes (a "60MB" L2 is 60 MiB).
inline constexpr std::uint64_t kKiB = 1024;
inline constexpr std::uint64_t kMiB = 1024 * kKiB;
inline constexpr std::uint64_t kGiB = 1024 * kMiB;

// Bandwidths and footprints use decimal prefixes (2.7 TB/s, 6 GB).
inline constexpr double kGB = 1e9;
inline constexpr double kTB = 1e12;

// Sentinel for "infinite" byte capacities.
inline constexpr std::uint64_t kInfiniteBytes =
    std::numeric_limits<std::uint64_t>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool IsInfinite(double v) { return v == kInfinity; }
inline bool IsInfinite(std::uint64_t v) { return v == kInfiniteBytes; }

inline bool IsPowerOfTwo(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Parses "60MB", "128", "128B", "4KB", "1.5GB", "inf". Binary prefixes.
// Throws std::invalid_argument on malformed input.
std::uint64_t ParseBytes(std::string_view text);

// Parses "2.7TB/s", "447.8GB/s", "900" (GB/s), "inf". Returns GB/s.
double ParseBandwidthGBps(std::string_view text);

// Inverse of ParseBytes for exact multiples; falls back to a plain count.
std::string FormatBytes(std::uint64_t bytes);

}  // namespace copa

#endif  // COPA_UNITS_H_

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

#include "copa/units.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "copa/errors.h"

namespace copa {
namespace {

std::string Lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

// Splits "1.5GB" into (1.5, "gb").
std::pair<double, std::string> SplitNumber(const std::string& s) {
  std::size_t end = 0;
  while (end < s.size() &&
         (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
          s[end] == 'e' || s[end] == '+' || s[end] == '-')) {
    // Stop at a trailing 'e' that is not an exponent.
    if (s[end] == 'e' && (end + 1 >= s.size() ||
                          !(std::isdigit(static_cast<unsigned char>(s[end + 1])) ||
                            s[end + 1] == '-' || s[end + 1] == '+'))) {
      break;
    }
    ++end;
  }
  if (end == 0) throw std::invalid_argument("expected a number in '" + s + "'");
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + end, value);
  if (ec != std::errc() || ptr != s.data() + end) {
    throw std::invalid_argument("malformed number in '" + s + "'");
  }
  return {value, s.substr(end)};
}

}  // namespace

std::uint64_t ParseBytes(std::string_view text) {
  const std::string s = Lower(text);
  if (s == "inf" || s == "infinite") return kInfiniteBytes;
  auto [value, suffix] = SplitNumber(s);
  double scale = 0;
  if (suffix.empty() || suffix == "b") {
    scale = 1;
  } else if (suffix == "kb" || suffix == "kib") {
    scale = static_cast<double>(kKiB);
  } else if (suffix == "mb" || suffix == "mib") {
    scale = static_cast<double>(kMiB);
  } else if (suffix == "gb" || suffix == "gib") {
    scale = static_cast<double>(kGiB);
  } else if (suffix == "tb" || suffix == "tib") {
    scale = static_cast<double>(kGiB) * 1024.0;
  } else {
    throw std::invalid_argument("unknown byte unit '" + suffix + "'");
  }
  const double bytes = value * scale;
  if (bytes < 0 || bytes != std::floor(bytes) || bytes >= 1.8e19) {
    throw std::invalid_argument("'" + std::string(text) +
                                "' is not a whole, non-negative byte count");
  }
  return static_cast<std::uint64_t>(bytes);
}

double ParseBandwidthGBps(std::string_view text) {
  const std::string s = Lower(text);
  if (s == "inf" || s == "infinite") return kInfinity;
  auto [value, suffix] = SplitNumber(s);
  if (value < 0) throw std::invalid_argument("negative bandwidth");
  if (suffix.empty() || suffix == "gb/s") return value;
  if (suffix == "tb/s") return value * 1e3;
  if (suffix == "mb/s") return value * 1e-3;
  throw std::invalid_argument("unknown bandwidth unit '" + suffix + "'");
}

std::string FormatBytes(std::uint64_t bytes) {
  if (IsInfinite(bytes)) return "inf";
  if (bytes != 0) {
    if (bytes % kGiB == 0) return std::to_string(bytes / kGiB) + "GB";
    if (bytes % kMiB == 0) return std::to_string(bytes / kMiB) + "MB";
    if (bytes % kKiB == 0) return std::to_string(bytes / kKiB) + "KB";
  }
  return std::to_string(bytes) + "B";
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "design validation failed:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

}  // namespace copa

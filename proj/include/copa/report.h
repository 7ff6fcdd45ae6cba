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

#ifndef COPA_REPORT_H_
#define COPA_REPORT_H_

// Markdown summary of a sweep results directory, one table per figure
// analogue with published reference values alongside.

#include <filesystem>
#include <string>
#include <vector>

namespace copa {

struct ReportOutput {
  std::string markdown;
  std::vector<std::string> missing;  // absent or unreadable inputs
  std::vector<std::string> figures;  // figure analogues emitted, e.g. "Fig. 7"

  bool ok() const { return missing.empty(); }
};

// Reads every <name>.csv in `dir` (and summary.json when present).
ReportOutput BuildReport(const std::filesystem::path& dir, bool timestamp = false);

}  // namespace copa

#endif  // COPA_REPORT_H_

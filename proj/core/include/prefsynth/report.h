// Copyright 2026 The prefsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFSYNTH_REPORT_H_
#define PREFSYNTH_REPORT_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prefsynth/records.h"
#include "prefsynth/types.h"

namespace prefsynth {

inline constexpr std::size_t kHistogramBins = 10;

struct ConstraintStat {
  std::string name;
  std::size_t count = 0;
  double sum = 0.0;

  double mean() const { return count == 0 ? 0.0 : sum / count; }
};

struct GroupStats {
  std::size_t groups = 0;
  std::size_t combinations_enumerated = 0;
  std::size_t conflict_free = 0;  // groups whose best combination has none
  std::size_t greedy_groups = 0;

  double conflict_free_fraction() const {
    return groups == 0 ? 0.0 : static_cast<double>(conflict_free) / groups;
  }
};

struct RunReport {
  std::size_t instances_in = 0;  // non-blank input lines
  std::size_t lines_rejected = 0;
  std::size_t instances_skipped = 0;
  std::size_t instances_contributing = 0;
  std::size_t candidates_scored = 0;
  std::size_t pairs_emitted = 0;     // records in the preference output
  std::size_t validation_pairs = 0;  // records in the holdout output
  std::size_t ranked_emitted = 0;
  std::size_t losses_emitted = 0;
  std::vector<ConstraintStat> constraints;  // declaration order
  std::array<std::size_t, kHistogramBins> histogram{};  // final candidate CSR
  GroupStats groups;
  std::map<std::string, std::size_t> skip_reasons;
};

// Bin i covers [i/10, (i+1)/10); the last bin also holds 1.0.
std::size_t HistogramBin(double csr);

// Adds one candidate's score to the per-constraint means and histogram.
void AccumulateScore(RunReport& report, const CsrScore& score);

void MergeReport(RunReport& into, const RunReport& from);

// Per-constraint means and histogram over a scored file's contents.
RunReport SummarizeScores(std::span<const ScoredInstance> scored);

std::string ReportToJson(const RunReport& report);
RunReport ReportFromJson(const std::string& text);

// Human-readable table of the same contents.
std::string RenderReportTable(const RunReport& report);

// Writes the JSON report to `path` and the table next to it (".txt").
void EmitReport(const RunReport& report, const std::filesystem::path& path);
std::filesystem::path ReportTablePath(const std::filesystem::path& path);

}  // namespace prefsynth

#endif  // PREFSYNTH_REPORT_H_

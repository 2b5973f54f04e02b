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

#ifndef PREFSYNTH_RECORDS_H_
#define PREFSYNTH_RECORDS_H_

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "prefsynth/loss_oracle.h"
#include "prefsynth/preference.h"
#include "prefsynth/types.h"

namespace prefsynth {

// Line-delimited JSON codecs. Every Parse* function throws an input error
// describing the first problem found; every Serialize* function returns a
// single line without the trailing newline.

// {instance_id, group_id?, role?, prompt,
//  candidates: [{candidate_id, text, sum_logprob, token_count}]}
Instance ParseInstance(const std::string& line);
std::string SerializeInstance(const Instance& instance);

// {instance_id, prompt, chosen: {candidate_id, text},
//  rejected: {candidate_id, text}, csr_chosen, csr_rejected, margin, source}
PreferenceRecord ParsePreferenceRecord(const std::string& line);
std::string SerializePreferenceRecord(const PreferenceRecord& record);

struct RankedRecord {
  std::string instance_id;
  std::vector<std::string> ranking;
  std::vector<double> csr;
  std::vector<double> scores;
};

// {instance_id, ranking: [candidate_id...], csr: [...], scores: [...]}
RankedRecord ParseRankedRecord(const std::string& line);
std::string SerializeRankedRecord(const RankedRecord& record);

// Output of `verify`: the instance with per-candidate CSR and parts.
struct ScoredInstance {
  Instance instance;
  std::vector<CsrScore> scores;  // aligned with instance.candidates
};

ScoredInstance ParseScoredInstance(const std::string& line);
std::string SerializeScoredInstance(const ScoredInstance& scored);

LossReport ParseLossReport(const std::string& line);
std::string SerializeLossReport(const LossReport& report);

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based
  std::string error;
};

std::string SerializeRejectedLine(const RejectedLine& rejected);

// Calls `visit(line_number, line)` for each non-blank line; CR before LF is
// stripped. Throws an I/O error if the file cannot be opened.
void ForEachLine(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const std::string&)>& visit);
void ForEachLine(
    std::istream& in,
    const std::function<void(std::size_t, const std::string&)>& visit);

struct LoadResult {
  std::vector<Instance> instances;  // input order
  std::vector<RejectedLine> rejected;
  std::size_t lines_read = 0;
};

// Parses and validates every line. Malformed lines and duplicate
// instance_ids are collected in `rejected` rather than thrown.
LoadResult LoadInstances(const std::filesystem::path& path);
LoadResult LoadInstances(std::istream& in);

// Data error when rejected / lines_read exceeds `max_fraction`.
void EnforceRejectThreshold(const LoadResult& result, double max_fraction);

// Buffered line writer; throws I/O errors on open and on close failures.
class LineWriter {
 public:
  explicit LineWriter(const std::filesystem::path& path);
  ~LineWriter();

  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void Write(const std::string& line);
  // Appends pre-rendered newline-terminated lines.
  void WriteBlock(const std::string& block, std::size_t line_count);
  void Close();
  std::size_t lines() const { return lines_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::size_t lines_ = 0;
};

}  // namespace prefsynth

#endif  // PREFSYNTH_RECORDS_H_

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

#ifndef PREFSYNTH_PREFERENCE_H_
#define PREFSYNTH_PREFERENCE_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefsynth/types.h"

namespace prefsynth {

enum class PreferenceSource { kInstanceCsr, kGroupCombination };

std::string_view PreferenceSourceName(PreferenceSource source);

struct PreferenceRecord {
  std::string instance_id;
  std::string prompt;
  CandidateResponse chosen;
  CandidateResponse rejected;
  double csr_chosen = 0.0;
  double csr_rejected = 0.0;
  double margin = 0.0;
  PreferenceSource source = PreferenceSource::kInstanceCsr;
};

// Filters that decide which candidate pairs become supervision.
struct SelectionPolicy {
  // Minimum CSR gap between chosen and rejected (true negatives).
  double gap_epsilon = 0.1;
  // The rejected candidate's score must reach this quantile of the
  // instance's candidate scores (hard negatives). 0 disables the floor.
  double min_logprob_quantile = 0.0;
  // Emit one (CSR = 1, CSR < 1) pair per instance instead of all pairs.
  bool binary_mode = false;
  std::size_t max_pairs_per_instance = 16;
  ScoreMode score_mode = ScoreMode::kLengthNormalized;
};

void ValidateSelectionPolicy(const SelectionPolicy& policy);

enum class MarginMode { kCsrGap, kConstant };

std::string_view MarginModeName(MarginMode mode);

struct MarginSettings {
  MarginMode mode = MarginMode::kCsrGap;
  double constant = 0.0;  // used by kConstant
  double scale = 1.0;     // multiplies the CSR gap under kCsrGap
};

// Ranking margin for a (higher-CSR, lower-CSR) pair. csr_hi < csr_lo beyond
// kCsrEpsilon is an internal invariant violation.
double ComputeMargin(double csr_hi, double csr_lo,
                     const MarginSettings& settings = {});

// Lower order statistic s[floor(q * (n - 1))] of the ascending scores.
double ScoreQuantile(std::vector<double> scores, double q);

// Candidate indices ordered by descending CSR, then descending score, then
// candidate_id. `scores` is aligned with instance.candidates.
std::vector<std::size_t> RankCandidateIndices(
    const Instance& instance, std::span<const CsrScore> scores,
    ScoreMode mode = ScoreMode::kLengthNormalized);

std::vector<std::string> RankCandidates(
    const Instance& instance, std::span<const CsrScore> scores,
    ScoreMode mode = ScoreMode::kLengthNormalized);

// Builds instance_csr records for one instance. Pairs need a CSR gap of at
// least gap_epsilon and a rejected candidate above the score floor; they are
// ordered by descending gap, then descending rejected score, and truncated
// to max_pairs_per_instance. In binary mode at most one pair is returned:
// the top-ranked fully satisfying candidate against the highest-scoring
// violating candidate that passes the same filters.
std::vector<PreferenceRecord> SelectPairs(const Instance& instance,
                                          std::span<const CsrScore> scores,
                                          const SelectionPolicy& policy,
                                          const MarginSettings& margin = {});

}  // namespace prefsynth

#endif  // PREFSYNTH_PREFERENCE_H_

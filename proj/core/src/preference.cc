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

#include "prefsynth/preference.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "prefsynth/error.h"

namespace prefsynth {
namespace {

void CheckAligned(const Instance& instance, std::span<const CsrScore> scores) {
  if (scores.size() != instance.candidates.size()) {
    ThrowInternalError("instance '" + instance.instance_id + "': " +
                       std::to_string(scores.size()) + " scores for " +
                       std::to_string(instance.candidates.size()) +
                       " candidates");
  }
}

bool IsSatisfying(double csr) { return csr >= 1.0 - kCsrEpsilon; }

// CSR bucketed at kCsrEpsilon resolution. Sorting on the bucket instead of
// an epsilon comparison keeps the ordering a strict weak order.
long long CsrKey(double csr) { return std::llround(csr / kCsrEpsilon); }

struct Candidate {
  std::size_t index;
  double csr;
  double score;
};

}  // namespace

std::string_view PreferenceSourceName(PreferenceSource source) {
  return source == PreferenceSource::kInstanceCsr ? "instance_csr"
                                                  : "group_combination";
}

std::string_view MarginModeName(MarginMode mode) {
  return mode == MarginMode::kCsrGap ? "csr_gap" : "constant";
}

void ValidateSelectionPolicy(const SelectionPolicy& policy) {
  if (!(policy.gap_epsilon > 0.0) || !std::isfinite(policy.gap_epsilon)) {
    ThrowConfigError("gap_epsilon must be > 0");
  }
  if (!(policy.min_logprob_quantile >= 0.0 &&
        policy.min_logprob_quantile < 1.0)) {
    ThrowConfigError("min_logprob_quantile must be in [0, 1)");
  }
  if (policy.max_pairs_per_instance < 1) {
    ThrowConfigError("max_pairs_per_instance must be >= 1");
  }
}

double ComputeMargin(double csr_hi, double csr_lo,
                     const MarginSettings& settings) {
  if (csr_hi < csr_lo - kCsrEpsilon) {
    ThrowInternalError("margin requested for csr_hi " + std::to_string(csr_hi) +
                       " < csr_lo " + std::to_string(csr_lo));
  }
  if (settings.mode == MarginMode::kConstant) return settings.constant;
  return settings.scale * std::max(0.0, csr_hi - csr_lo);
}

double ScoreQuantile(std::vector<double> scores, double q) {
  if (scores.empty()) ThrowInternalError("quantile of an empty score list");
  std::sort(scores.begin(), scores.end());
  const auto pos = static_cast<std::size_t>(
      std::floor(q * static_cast<double>(scores.size() - 1)));
  return scores[std::min(pos, scores.size() - 1)];
}

std::vector<std::size_t> RankCandidateIndices(const Instance& instance,
                                              std::span<const CsrScore> scores,
                                              ScoreMode mode) {
  CheckAligned(instance, scores);
  std::vector<Candidate> items;
  items.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    items.push_back(
        {i, scores[i].value, SequenceScore(instance.candidates[i], mode)});
  }
  std::sort(items.begin(), items.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (CsrKey(a.csr) != CsrKey(b.csr)) return a.csr > b.csr;
              if (a.score != b.score) return a.score > b.score;
              return instance.candidates[a.index].candidate_id <
                     instance.candidates[b.index].candidate_id;
            });
  std::vector<std::size_t> order;
  order.reserve(items.size());
  for (const Candidate& c : items) order.push_back(c.index);
  return order;
}

std::vector<std::string> RankCandidates(const Instance& instance,
                                        std::span<const CsrScore> scores,
                                        ScoreMode mode) {
  std::vector<std::string> ids;
  for (std::size_t i : RankCandidateIndices(instance, scores, mode)) {
    ids.push_back(instance.candidates[i].candidate_id);
  }
  return ids;
}

std::vector<PreferenceRecord> SelectPairs(const Instance& instance,
                                          std::span<const CsrScore> scores,
                                          const SelectionPolicy& policy,
                                          const MarginSettings& margin) {
  CheckAligned(instance, scores);
  std::vector<PreferenceRecord> records;
  if (instance.candidates.size() < 2) return records;

  std::vector<double> seq_scores;
  seq_scores.reserve(instance.candidates.size());
  for (const CandidateResponse& c : instance.candidates) {
    seq_scores.push_back(SequenceScore(c, policy.score_mode));
  }
  const double floor =
      policy.min_logprob_quantile > 0.0
          ? ScoreQuantile(seq_scores, policy.min_logprob_quantile)
          : -HUGE_VAL;

  auto make_record = [&](std::size_t hi, std::size_t lo) {
    PreferenceRecord r;
    r.instance_id = instance.instance_id;
    r.prompt = instance.prompt;
    r.chosen = instance.candidates[hi];
    r.rejected = instance.candidates[lo];
    r.csr_chosen = scores[hi].value;
    r.csr_rejected = scores[lo].value;
    r.margin = ComputeMargin(r.csr_chosen, r.csr_rejected, margin);
    r.source = PreferenceSource::kInstanceCsr;
    return r;
  };
  auto passes = [&](std::size_t hi, std::size_t lo) {
    return scores[hi].value - scores[lo].value >=
               policy.gap_epsilon - kCsrEpsilon &&
           seq_scores[lo] >= floor;
  };

  const std::vector<std::size_t> ranked =
      RankCandidateIndices(instance, scores, policy.score_mode);

  if (policy.binary_mode) {
    const auto chosen = std::find_if(ranked.begin(), ranked.end(), [&](auto i) {
      return IsSatisfying(scores[i].value);
    });
    if (chosen == ranked.end()) return records;
    std::optional<std::size_t> rejected;
    for (std::size_t i : ranked) {
      if (IsSatisfying(scores[i].value) || !passes(*chosen, i)) continue;
      if (!rejected || seq_scores[i] > seq_scores[*rejected]) rejected = i;
    }
    if (rejected) records.push_back(make_record(*chosen, *rejected));
    return records;
  }

  struct Pair {
    std::size_t hi;
    std::size_t lo;
    double gap;
  };
  std::vector<Pair> pairs;
  // rank position breaks the remaining ties deterministically
  std::vector<std::size_t> position(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) position[ranked[r]] = r;
  for (std::size_t hi = 0; hi < scores.size(); ++hi) {
    for (std::size_t lo = 0; lo < scores.size(); ++lo) {
      if (hi == lo || !passes(hi, lo)) continue;
      pairs.push_back({hi, lo, scores[hi].value - scores[lo].value});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (CsrKey(a.gap) != CsrKey(b.gap)) return a.gap > b.gap;
    if (seq_scores[a.lo] != seq_scores[b.lo]) {
      return seq_scores[a.lo] > seq_scores[b.lo];
    }
    if (position[a.hi] != position[b.hi]) return position[a.hi] < position[b.hi];
    return position[a.lo] < position[b.lo];
  });
  if (pairs.size() > policy.max_pairs_per_instance) {
    pairs.resize(policy.max_pairs_per_instance);
  }
  records.reserve(pairs.size());
  for (const Pair& p : pairs) records.push_back(make_record(p.hi, p.lo));
  return records;
}

}  // namespace prefsynth

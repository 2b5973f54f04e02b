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

#include "prefsynth/types.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "prefsynth/error.h"

namespace prefsynth {

void ValidateCandidate(const CandidateResponse& candidate) {
  if (candidate.candidate_id.empty()) {
    ThrowInputError("candidate_id must be non-empty");
  }
  if (candidate.token_count < 1) {
    ThrowInputError("candidate '" + candidate.candidate_id +
                    "': token_count must be >= 1");
  }
  if (!std::isfinite(candidate.sum_logprob) || candidate.sum_logprob > 0.0) {
    ThrowInputError("candidate '" + candidate.candidate_id +
                    "': sum_logprob must be a finite value <= 0");
  }
}

void ValidateInstance(const Instance& instance) {
  if (instance.instance_id.empty()) {
    ThrowInputError("instance_id must be non-empty");
  }
  if (instance.candidates.empty()) {
    ThrowInputError("instance '" + instance.instance_id +
                    "' has no candidates");
  }
  std::set<std::string> seen;
  for (const CandidateResponse& c : instance.candidates) {
    ValidateCandidate(c);
    if (!seen.insert(c.candidate_id).second) {
      ThrowInputError("instance '" + instance.instance_id +
                      "': duplicate candidate_id '" + c.candidate_id + "'");
    }
  }
}

double CombineCsr(std::span<const WeightedValue> parts,
                  Combinator combinator) {
  if (parts.empty()) {
    ThrowInputError("cannot combine an empty list of CSR parts");
  }
  for (const WeightedValue& p : parts) {
    if (!(p.value >= 0.0 && p.value <= 1.0)) {
      ThrowInputError("CSR part value " + std::to_string(p.value) +
                      " outside [0, 1]");
    }
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) {
      ThrowConfigError("CSR weight must be a finite nonnegative number");
    }
  }
  if (combinator == Combinator::kMin) {
    double lowest = 1.0;
    for (const WeightedValue& p : parts) lowest = std::min(lowest, p.value);
    return lowest;
  }
  double weighted = 0.0;
  double total = 0.0;
  for (const WeightedValue& p : parts) {
    weighted += p.weight * p.value;
    total += p.weight;
  }
  if (total <= 0.0) {
    ThrowConfigError("weighted_mean requires at least one positive weight");
  }
  return std::clamp(weighted / total, 0.0, 1.0);
}

CsrScore MakeCsrScore(std::vector<CsrPart> parts, const CompositeSpec& spec) {
  std::vector<WeightedValue> values;
  values.reserve(parts.size());
  for (const CsrPart& p : parts) values.push_back({p.value, p.weight});
  CsrScore score;
  score.value = CombineCsr(values, spec.combinator);
  score.parts = std::move(parts);
  return score;
}

double NormalizedScore(const CandidateResponse& candidate) {
  if (candidate.token_count < 1) {
    ThrowInputError("candidate '" + candidate.candidate_id +
                    "': token_count must be >= 1");
  }
  return candidate.sum_logprob / static_cast<double>(candidate.token_count);
}

double SequenceScore(const CandidateResponse& candidate, ScoreMode mode) {
  return mode == ScoreMode::kRawSum ? candidate.sum_logprob
                                    : NormalizedScore(candidate);
}

}  // namespace prefsynth

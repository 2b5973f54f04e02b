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

#ifndef PREFSYNTH_TYPES_H_
#define PREFSYNTH_TYPES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prefsynth {

// Tolerance for CSR equality comparisons in preference logic.
inline constexpr double kCsrEpsilon = 1e-9;

// One sampled response. `sum_logprob` is the natural-log joint probability of
// the token sequence under the generator; `token_count` comes from the
// generator and is never recomputed here.
struct CandidateResponse {
  std::string candidate_id;
  std::string text;
  double sum_logprob = 0.0;
  std::int64_t token_count = 1;
};

// A prompt with its candidate pool. Instances sharing a `group_id` are
// verified jointly by group constraints; `role` tags the member's relation
// within its group (before / during / after for temporal groups).
struct Instance {
  std::string instance_id;
  std::optional<std::string> group_id;
  std::string prompt;
  std::optional<std::string> role;
  std::vector<CandidateResponse> candidates;
};

// Throws an input error if the candidate violates token_count >= 1 or
// sum_logprob <= 0.
void ValidateCandidate(const CandidateResponse& candidate);

// Checks per-instance invariants: non-empty id, at least one candidate,
// unique candidate ids, valid candidates.
void ValidateInstance(const Instance& instance);

enum class Combinator { kWeightedMean, kMin };

struct CompositeSpec {
  Combinator combinator = Combinator::kWeightedMean;
};

struct WeightedValue {
  double value = 0.0;
  double weight = 1.0;
};

// Combines sub-verifier CSRs. Weighted mean is sum(w*v)/sum(w); min ignores
// the weights. Throws a config error when every weight is zero under the
// weighted mean and an input error for an empty list or out-of-range values.
double CombineCsr(std::span<const WeightedValue> parts, Combinator combinator);

struct CsrPart {
  std::string constraint_name;
  double value = 0.0;
  double weight = 1.0;
};

struct CsrScore {
  double value = 0.0;
  std::vector<CsrPart> parts;
};

CsrScore MakeCsrScore(std::vector<CsrPart> parts, const CompositeSpec& spec);

// How the generator probability P(y|x) enters ranking decisions.
enum class ScoreMode {
  kLengthNormalized,  // sum_logprob / token_count
  kRawSum,            // sum_logprob
};

// Length-normalized log-probability. Throws an input error when
// token_count < 1.
double NormalizedScore(const CandidateResponse& candidate);

double SequenceScore(const CandidateResponse& candidate, ScoreMode mode);

}  // namespace prefsynth

#endif  // PREFSYNTH_TYPES_H_

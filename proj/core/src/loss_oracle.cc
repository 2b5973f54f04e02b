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

#include "prefsynth/loss_oracle.h"

#include <algorithm>
#include <cmath>

#include "prefsynth/error.h"

namespace prefsynth {

double FineTuneLoss(const CandidateResponse& best, double csr_best,
                    bool reweighted) {
  const double nll = 0.0 - best.sum_logprob;
  return reweighted ? csr_best * nll : nll;
}

RankLossResult RankLoss(std::span<const ScoredCandidate> candidates,
                        const MarginSettings& margin) {
  RankLossResult result;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const ScoredCandidate& lo = candidates[i];
      const ScoredCandidate& hi = candidates[j];
      if (!(lo.csr < hi.csr - kCsrEpsilon)) continue;
      const double m = ComputeMargin(hi.csr, lo.csr, margin);
      const double hinge = std::max(0.0, lo.score - hi.score + m);
      result.value += hinge;
      result.terms.push_back({i, j, hinge});
    }
  }
  return result;
}

LossReport ComputeLossReport(const Instance& instance,
                             std::span<const CsrScore> scores,
                             const LossOptions& options) {
  if (options.ft_top_k < 1) ThrowConfigError("ft_top_k must be >= 1");
  const std::vector<std::size_t> ranked =
      RankCandidateIndices(instance, scores, options.score_mode);

  LossReport report;
  report.instance_id = instance.instance_id;
  report.reweighted = options.reweighted;
  report.margin_mode = options.margin.mode;

  const std::size_t top = std::min(options.ft_top_k, ranked.size());
  for (std::size_t r = 0; r < top; ++r) {
    const std::size_t i = ranked[r];
    report.l_ft += FineTuneLoss(instance.candidates[i], scores[i].value,
                                options.reweighted);
  }

  std::vector<ScoredCandidate> scored;
  scored.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scored.push_back({instance.candidates[i].candidate_id, scores[i].value,
                      SequenceScore(instance.candidates[i], options.score_mode)});
  }
  RankLossResult rank = RankLoss(scored, options.margin);
  report.l_rank = rank.value;
  report.per_pair_terms = std::move(rank.terms);
  report.total = report.l_ft + report.l_rank;
  return report;
}

}  // namespace prefsynth

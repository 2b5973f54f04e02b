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

#ifndef PREFSYNTH_LOSS_ORACLE_H_
#define PREFSYNTH_LOSS_ORACLE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prefsynth/preference.h"
#include "prefsynth/types.h"

namespace prefsynth {

// Reference values of the fine-tuning and ranking objectives for one prompt.
// Trainers use these to check their own loss code; nothing here computes
// gradients.

// Negative log-likelihood of the best candidate, optionally weighted by its
// CSR.
double FineTuneLoss(const CandidateResponse& best, double csr_best,
                    bool reweighted);

struct ScoredCandidate {
  std::string candidate_id;
  double csr = 0.0;
  double score = 0.0;  // s in the hinge, see ScoreMode
};

struct PairTerm {
  std::size_t lower = 0;   // index of the lower-CSR candidate
  std::size_t higher = 0;  // index of the higher-CSR candidate
  double hinge = 0.0;
};

struct RankLossResult {
  double value = 0.0;
  std::vector<PairTerm> terms;
};

// Sum over pairs with csr_i < csr_j of max(0, s_i - s_j + margin(j, i)).
// Pairs whose CSRs are within kCsrEpsilon contribute nothing.
RankLossResult RankLoss(std::span<const ScoredCandidate> candidates,
                        const MarginSettings& margin = {});

struct LossOptions {
  bool reweighted = true;
  MarginSettings margin;
  ScoreMode score_mode = ScoreMode::kLengthNormalized;
  // Number of top-ranked candidates entering the fine-tuning term.
  std::size_t ft_top_k = 1;
};

struct LossReport {
  std::string instance_id;
  double l_ft = 0.0;
  double l_rank = 0.0;
  double total = 0.0;  // l_ft + l_rank, unweighted
  std::vector<PairTerm> per_pair_terms;
  bool reweighted = true;
  MarginMode margin_mode = MarginMode::kCsrGap;
};

// Ranks the candidates, takes the fine-tuning term over the top ft_top_k and
// the ranking term over all candidates.
LossReport ComputeLossReport(const Instance& instance,
                             std::span<const CsrScore> scores,
                             const LossOptions& options = {});

}  // namespace prefsynth

#endif  // PREFSYNTH_LOSS_ORACLE_H_

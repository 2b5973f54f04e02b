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

#include <algorithm>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "gtest/gtest.h"
#include "oracles/oracles.h"
#include "prefsynth/error.h"
#include "prefsynth/preference.h"

namespace prefsynth {
namespace {

// Candidates with the given CSRs; token_count 1 so the score equals
// sum_logprob.
struct Fixture {
  Instance instance;
  std::vector<CsrScore> scores;
};

Fixture Make(const std::vector<double>& csr, const std::vector<double>& lp) {
  Fixture f;
  f.instance = {"i", std::nullopt, "p", std::nullopt, {}};
  for (std::size_t i = 0; i < csr.size(); ++i) {
    const std::string id(1, static_cast<char>('a' + i));
    f.instance.candidates.push_back({id, "t" + id, lp[i], 1});
    f.scores.push_back({csr[i], {}});
  }
  return f;
}

TEST(SelectPairsTest, Examples) {
  SelectionPolicy policy;
  auto f = Make({1.0, 0.0}, {-2, -1});
  auto pairs = SelectPairs(f.instance, f.scores, policy);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].chosen.candidate_id, "a");
  EXPECT_DOUBLE_EQ(pairs[0].margin, 1.0);
  EXPECT_EQ(pairs[0].source, PreferenceSource::kInstanceCsr);

  policy.binary_mode = true;
  f = Make({1, 1, 0}, {-1, -2, -3});
  pairs = SelectPairs(f.instance, f.scores, policy);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].csr_chosen, 1.0);
  EXPECT_EQ(pairs[0].rejected.candidate_id, "c");

  policy.binary_mode = false;
  policy.gap_epsilon = 0.05;
  f = Make({0.8, 0.79}, {-1, -1});
  EXPECT_TRUE(SelectPairs(f.instance, f.scores, policy).empty());
}

TEST(SelectPairsTest, BinaryModeNeedsBothSides) {
  SelectionPolicy policy;
  policy.binary_mode = true;
  auto f = Make({0.5, 0.0}, {-1, -1});
  EXPECT_TRUE(SelectPairs(f.instance, f.scores, policy).empty());
  f = Make({1, 1}, {-1, -1});
  EXPECT_TRUE(SelectPairs(f.instance, f.scores, policy).empty());
}

TEST(SelectPairsTest, OrderedByGapThenRejectedScore) {
  SelectionPolicy policy;
  auto f = Make({1.0, 0.5, 0.0, 0.0}, {-1, -1, -3, -2});
  const auto pairs = SelectPairs(f.instance, f.scores, policy);
  ASSERT_EQ(pairs.size(), 5u);
  EXPECT_EQ(pairs[0].rejected.candidate_id, "d");
  EXPECT_EQ(pairs[1].rejected.candidate_id, "c");
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_GE(pairs[i - 1].csr_chosen - pairs[i - 1].csr_rejected,
              pairs[i].csr_chosen - pairs[i].csr_rejected - 1e-12);
  }
}

TEST(SelectPairsTest, EqualsAllPairsOracleWhenUnbounded) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> csr_step(0, 4);
  std::uniform_real_distribution<double> lp(-5.0, 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + rng() % 6;
    std::vector<double> csr(n), score(n);
    for (int i = 0; i < n; ++i) {
      csr[i] = csr_step(rng) / 4.0;
      score[i] = lp(rng);
    }
    SelectionPolicy policy;
    policy.gap_epsilon = 0.25 * (1 + rng() % 2);
    policy.min_logprob_quantile = (rng() % 3) * 0.3;
    policy.max_pairs_per_instance = 1000;
    auto f = Make(csr, score);
    const auto pairs = SelectPairs(f.instance, f.scores, policy);
    std::vector<double> sorted = score;
    std::sort(sorted.begin(), sorted.end());
    const double floor = policy.min_logprob_quantile == 0
                             ? -1e300
                             : sorted[static_cast<std::size_t>(
                                   policy.min_logprob_quantile * (n - 1))];
    const auto want = oracle::AllQualifyingPairs(csr, score,
                                                 policy.gap_epsilon, floor);
    std::vector<std::pair<std::string, std::string>> got_ids, want_ids;
    for (const auto& p : pairs) {
      got_ids.emplace_back(p.chosen.candidate_id, p.rejected.candidate_id);
      EXPECT_GE(p.csr_chosen, p.csr_rejected + policy.gap_epsilon - 1e-9);
    }
    for (const auto& p : want) {
      want_ids.emplace_back(f.instance.candidates[p.hi].candidate_id,
                            f.instance.candidates[p.lo].candidate_id);
    }
    std::sort(got_ids.begin(), got_ids.end());
    std::sort(want_ids.begin(), want_ids.end());
    EXPECT_EQ(got_ids, want_ids);

    policy.max_pairs_per_instance = 2;
    const auto capped = SelectPairs(f.instance, f.scores, policy);
    EXPECT_EQ(capped.size(), std::min<std::size_t>(2, pairs.size()));
    for (std::size_t i = 0; i < capped.size(); ++i) {
      EXPECT_EQ(capped[i].chosen.candidate_id, pairs[i].chosen.candidate_id);
      EXPECT_EQ(capped[i].rejected.candidate_id, pairs[i].rejected.candidate_id);
    }
  }
}

TEST(RankCandidatesTest, Examples) {
  auto f = Make({1.0, 0.5, 0.0}, {-3, -2, -1});
  EXPECT_EQ(RankCandidates(f.instance, f.scores),
            (std::vector<std::string>{"a", "b", "c"}));
  f = Make({0.5, 0.5}, {-1, -2});
  EXPECT_EQ(RankCandidates(f.instance, f.scores),
            (std::vector<std::string>{"a", "b"}));
  f = Make({0.5, 0.5}, {-2, -1});
  EXPECT_EQ(RankCandidates(f.instance, f.scores),
            (std::vector<std::string>{"b", "a"}));
}

TEST(RankCandidatesTest, MatchesSortOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> csr(4), lp(4);
    for (int i = 0; i < 4; ++i) {
      csr[i] = (rng() % 3) / 2.0;
      lp[i] = -static_cast<double>(rng() % 3);
    }
    auto f = Make(csr, lp);
    std::vector<std::tuple<double, double, std::string>> keyed;
    for (int i = 0; i < 4; ++i) {
      keyed.emplace_back(-csr[i], -lp[i], f.instance.candidates[i].candidate_id);
    }
    std::stable_sort(keyed.begin(), keyed.end());
    std::vector<std::string> want;
    for (const auto& k : keyed) want.push_back(std::get<2>(k));
    EXPECT_EQ(RankCandidates(f.instance, f.scores), want);
  }
}

TEST(ComputeMarginTest, Examples) {
  EXPECT_DOUBLE_EQ(ComputeMargin(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(ComputeMargin(0.7, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(ComputeMargin(0.9, 0.4, {MarginMode::kConstant, 0.0, 1.0}),
                   0.0);
  EXPECT_DOUBLE_EQ(ComputeMargin(0.9, 0.4, {MarginMode::kConstant, 0.3, 1.0}),
                   0.3);
  EXPECT_DOUBLE_EQ(ComputeMargin(1.0, 0.5, {MarginMode::kCsrGap, 0.0, 2.0}),
                   1.0);
  try {
    ComputeMargin(0.2, 0.8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInternal);
  }
}

TEST(ScoreQuantileTest, LowerOrderStatistic) {
  EXPECT_EQ(ScoreQuantile({-4, -1, -3, -2}, 0.0), -4);
  EXPECT_EQ(ScoreQuantile({-4, -1, -3, -2}, 0.5), -3);
  EXPECT_EQ(ScoreQuantile({-4, -1, -3, -2}, 0.99), -2);
}

TEST(SelectionPolicyTest, Validation) {
  SelectionPolicy p;
  EXPECT_NO_THROW(ValidateSelectionPolicy(p));
  p.gap_epsilon = 0;
  EXPECT_THROW(ValidateSelectionPolicy(p), Error);
  p = {};
  p.min_logprob_quantile = 1.0;
  EXPECT_THROW(ValidateSelectionPolicy(p), Error);
  p = {};
  p.max_pairs_per_instance = 0;
  EXPECT_THROW(ValidateSelectionPolicy(p), Error);
}

}  // namespace
}  // namespace prefsynth

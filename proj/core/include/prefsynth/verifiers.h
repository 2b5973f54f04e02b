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

#ifndef PREFSYNTH_VERIFIERS_H_
#define PREFSYNTH_VERIFIERS_H_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prefsynth/temporal.h"
#include "prefsynth/types.h"

namespace prefsynth {

enum class ConstraintKind {
  kLabelOption,
  kLabelHierarchy,
  kExtractiveness,
  kRelevance,
  kTemporalConsistency,
};

// Which arguments a constraint reads: f(y), f(x, y) or f({x_i, y_i}).
enum class Arity { kResponseOnly, kPromptResponse, kGroup };

std::string_view ConstraintKindName(ConstraintKind kind);
std::optional<ConstraintKind> ParseConstraintKind(std::string_view name);
std::string_view ArityName(Arity arity);
std::optional<Arity> ParseArity(std::string_view name);

Arity ArityOf(ConstraintKind kind);

// kNormalized trims items, drops empty ones, folds case unless
// case_sensitive is set, collapses whitespace for substring checks and scores
// an empty response 0 everywhere. kLiteral reproduces the reference Python
// semantics exactly (split on the delimiter, exact membership, exact
// substring).
enum class MatchMode { kNormalized, kLiteral };

struct MatchOptions {
  std::string delimiter = ", ";
  bool case_sensitive = false;
  MatchMode mode = MatchMode::kNormalized;
};

using Fine2Coarse = std::map<std::string, std::string>;

// Answer items of a multi-label response under `match`.
std::vector<std::string> SplitAnswers(std::string_view response,
                                      const MatchOptions& match);

// 1 iff every answered item is one of `options`.
double VerifyLabelOption(std::string_view response,
                         std::span<const std::string> options,
                         const MatchOptions& match = {});

// 1 iff every answered fine type has its coarse type answered too. Items
// that are not keys of `fine2coarse` are skipped.
double VerifyLabelHierarchy(std::string_view response,
                            const Fine2Coarse& fine2coarse,
                            const MatchOptions& match = {});

// 1 iff the response occurs verbatim in the prompt input.
double VerifyExtractiveness(std::string_view prompt_input,
                            std::string_view response,
                            const MatchOptions& match = {});

// Clipped token recall of the response against the input: the share of
// response content tokens (lowercased, punctuation stripped, stopwords
// removed) matched in the input token multiset.
double LexicalRecall(std::string_view input, std::string_view response,
                     const std::set<std::string>& stopwords = {});

struct ScoringPair {
  std::string pair_id;
  std::string input;
  std::string response;
};

// Batch relevance scorer. Implementations must return one value in [0, 1]
// per pair, in request order.
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> ScoreBatch(std::span<const ScoringPair> pairs) = 0;
};

class LexicalRecallScorer : public RelevanceScorer {
 public:
  explicit LexicalRecallScorer(std::set<std::string> stopwords = {});
  std::string name() const override { return "lexical_recall"; }
  std::vector<double> ScoreBatch(std::span<const ScoringPair> pairs) override;

 private:
  std::set<std::string> stopwords_;
};

// Named external scorers. Lookups of unknown names raise a pipeline error.
class ScorerRegistry {
 public:
  void Register(std::string name, std::shared_ptr<RelevanceScorer> scorer);
  bool Contains(std::string_view name) const;
  std::shared_ptr<RelevanceScorer> Find(std::string_view name) const;

 private:
  std::map<std::string, std::shared_ptr<RelevanceScorer>, std::less<>>
      scorers_;
};

// Runs `scorer` and enforces the reply contract (count and [0, 1] range),
// raising a pipeline error that names the scorer otherwise.
std::vector<double> ScoreChecked(RelevanceScorer& scorer,
                                 std::span<const ScoringPair> pairs);

double VerifyRelevance(std::string_view prompt_input, std::string_view response,
                       RelevanceScorer& scorer);

enum class RelevanceScorerKind { kLexicalRecall, kExternal };

struct RelevanceParams {
  RelevanceScorerKind scorer = RelevanceScorerKind::kLexicalRecall;
  std::string external;  // registry name when scorer == kExternal
  std::set<std::string> stopwords;
};

struct TemporalParams {
  std::vector<temporal::RolePair> disjointness =
      temporal::DefaultDisjointness();
  std::size_t candidates_per_member = 2;
  std::size_t enumeration_cap = 4096;
  temporal::Fallback fallback = temporal::Fallback::kError;
  int greedy_sweeps = 3;
};

// Declarative description of one verifier.
struct ConstraintSpec {
  std::string name;
  ConstraintKind kind = ConstraintKind::kLabelOption;
  double weight = 1.0;
  std::optional<Arity> declared_arity;
  MatchOptions match;
  std::vector<std::string> options;
  Fine2Coarse fine2coarse;
  RelevanceParams relevance;
  TemporalParams temporal;

  Arity arity() const { return ArityOf(kind); }
};

// Config errors for inconsistent parameters (see ConstraintSpec docs).
void ValidateConstraintSpec(const ConstraintSpec& spec);

// Compiled evaluator over response-only and prompt-response constraints.
// Construction validates everything up front: group-arity specs, duplicate
// names, weights and unresolvable external scorers are config errors.
class ConstraintEvaluator {
 public:
  ConstraintEvaluator(std::vector<ConstraintSpec> specs, CompositeSpec composite,
                      const ScorerRegistry* registry = nullptr);

  const std::vector<ConstraintSpec>& specs() const { return specs_; }
  const CompositeSpec& composite() const { return composite_; }

  CsrScore Evaluate(const Instance& instance,
                    const CandidateResponse& candidate) const;

  // Scores every candidate of every instance. Relevance requests are sent
  // to each scorer as a single batch; results follow input order.
  std::vector<std::vector<CsrScore>> EvaluateBatch(
      std::span<const Instance> instances) const;

 private:
  struct Compiled {
    std::unordered_set<std::string> options;
    Fine2Coarse fine2coarse;
    std::shared_ptr<RelevanceScorer> scorer;
  };

  double EvaluateLocal(std::size_t index, const Instance& instance,
                       const CandidateResponse& candidate) const;

  std::vector<ConstraintSpec> specs_;
  std::vector<Compiled> compiled_;
  CompositeSpec composite_;
};

// One-shot form of ConstraintEvaluator::Evaluate.
CsrScore EvaluateInstance(const Instance& instance,
                          const CandidateResponse& candidate,
                          const std::vector<ConstraintSpec>& specs,
                          const CompositeSpec& composite,
                          const ScorerRegistry* registry = nullptr);

}  // namespace prefsynth

#endif  // PREFSYNTH_VERIFIERS_H_

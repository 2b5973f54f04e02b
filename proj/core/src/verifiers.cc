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

#include "prefsynth/verifiers.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "prefsynth/error.h"
#include "prefsynth/text.h"

namespace prefsynth {
namespace {

bool IsNormalized(const MatchOptions& match) {
  return match.mode == MatchMode::kNormalized;
}

std::string NormalizeLabel(std::string_view label, const MatchOptions& match) {
  if (!IsNormalized(match)) return std::string(label);
  std::string_view trimmed = text::Trim(label);
  return match.case_sensitive ? std::string(trimmed)
                              : text::ToLowerAscii(trimmed);
}

bool EmptyResponse(std::string_view response) {
  return text::Trim(response).empty();
}

double LabelOptionWithSet(std::string_view response,
                          const std::unordered_set<std::string>& options,
                          const MatchOptions& match) {
  if (IsNormalized(match) && EmptyResponse(response)) return 0.0;
  for (const std::string& item : SplitAnswers(response, match)) {
    if (options.count(item) == 0) return 0.0;
  }
  return 1.0;
}

double LabelHierarchyWithMap(std::string_view response,
                                const Fine2Coarse& fine2coarse,
                                const MatchOptions& match) {
  if (IsNormalized(match) && EmptyResponse(response)) return 0.0;
  const std::vector<std::string> answers = SplitAnswers(response, match);
  for (const std::string& item : answers) {
    auto it = fine2coarse.find(item);
    if (it == fine2coarse.end()) continue;
    if (std::find(answers.begin(), answers.end(), it->second) ==
        answers.end()) {
      return 0.0;
    }
  }
  return 1.0;
}

Fine2Coarse NormalizeHierarchy(const Fine2Coarse& fine2coarse,
                               const MatchOptions& match) {
  Fine2Coarse out;
  for (const auto& [fine, coarse] : fine2coarse) {
    out.emplace(NormalizeLabel(fine, match), NormalizeLabel(coarse, match));
  }
  return out;
}

std::unordered_set<std::string> NormalizeOptions(
    std::span<const std::string> options, const MatchOptions& match) {
  std::unordered_set<std::string> out;
  for (const std::string& o : options) out.insert(NormalizeLabel(o, match));
  return out;
}

}  // namespace

std::string_view ConstraintKindName(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kLabelOption:
      return "label_option";
    case ConstraintKind::kLabelHierarchy:
      return "label_hierarchy";
    case ConstraintKind::kExtractiveness:
      return "extractiveness";
    case ConstraintKind::kRelevance:
      return "relevance";
    case ConstraintKind::kTemporalConsistency:
      return "temporal_consistency";
  }
  return "unknown";
}

std::optional<ConstraintKind> ParseConstraintKind(std::string_view name) {
  for (ConstraintKind k :
       {ConstraintKind::kLabelOption, ConstraintKind::kLabelHierarchy,
        ConstraintKind::kExtractiveness, ConstraintKind::kRelevance,
        ConstraintKind::kTemporalConsistency}) {
    if (ConstraintKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view ArityName(Arity arity) {
  switch (arity) {
    case Arity::kResponseOnly:
      return "response_only";
    case Arity::kPromptResponse:
      return "prompt_response";
    case Arity::kGroup:
      return "group";
  }
  return "unknown";
}

std::optional<Arity> ParseArity(std::string_view name) {
  for (Arity a : {Arity::kResponseOnly, Arity::kPromptResponse, Arity::kGroup}) {
    if (ArityName(a) == name) return a;
  }
  return std::nullopt;
}

Arity ArityOf(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kLabelOption:
    case ConstraintKind::kLabelHierarchy:
      return Arity::kResponseOnly;
    case ConstraintKind::kExtractiveness:
    case ConstraintKind::kRelevance:
      return Arity::kPromptResponse;
    case ConstraintKind::kTemporalConsistency:
      return Arity::kGroup;
  }
  return Arity::kResponseOnly;
}

std::vector<std::string> SplitAnswers(std::string_view response,
                                      const MatchOptions& match) {
  std::vector<std::string> pieces = text::SplitExact(response, match.delimiter);
  if (!IsNormalized(match)) return pieces;
  std::vector<std::string> items;
  items.reserve(pieces.size());
  for (const std::string& piece : pieces) {
    std::string item = NormalizeLabel(piece, match);
    if (item.empty()) continue;
    if (std::find(items.begin(), items.end(), item) != items.end()) continue;
    items.push_back(std::move(item));
  }
  return items;
}

double VerifyLabelOption(std::string_view response,
                         std::span<const std::string> options,
                         const MatchOptions& match) {
  return LabelOptionWithSet(response, NormalizeOptions(options, match), match);
}

double VerifyLabelHierarchy(std::string_view response,
                            const Fine2Coarse& fine2coarse,
                            const MatchOptions& match) {
  if (!IsNormalized(match)) {
    return LabelHierarchyWithMap(response, fine2coarse, match);
  }
  return LabelHierarchyWithMap(response,
                                  NormalizeHierarchy(fine2coarse, match), match);
}

double VerifyExtractiveness(std::string_view prompt_input,
                            std::string_view response,
                            const MatchOptions& match) {
  if (!IsNormalized(match)) {
    return prompt_input.find(response) != std::string_view::npos ? 1.0 : 0.0;
  }
  const std::string needle = text::CollapseWhitespace(response);
  if (needle.empty()) return 0.0;
  const std::string haystack = text::CollapseWhitespace(prompt_input);
  return haystack.find(needle) != std::string::npos ? 1.0 : 0.0;
}

double LexicalRecall(std::string_view input, std::string_view response,
                     const std::set<std::string>& stopwords) {
  std::unordered_map<std::string, int> available;
  for (std::string& token : text::WordTokens(input)) {
    ++available[std::move(token)];
  }
  std::size_t content = 0;
  std::size_t matched = 0;
  for (const std::string& token : text::WordTokens(response)) {
    if (stopwords.count(token) != 0) continue;
    ++content;
    auto it = available.find(token);
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  if (content == 0) return 0.0;
  return static_cast<double>(matched) / static_cast<double>(content);
}

LexicalRecallScorer::LexicalRecallScorer(std::set<std::string> stopwords)
    : stopwords_(std::move(stopwords)) {}

std::vector<double> LexicalRecallScorer::ScoreBatch(
    std::span<const ScoringPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const ScoringPair& p : pairs) {
    out.push_back(LexicalRecall(p.input, p.response, stopwords_));
  }
  return out;
}

void ScorerRegistry::Register(std::string name,
                              std::shared_ptr<RelevanceScorer> scorer) {
  if (name.empty() || scorer == nullptr) {
    ThrowConfigError("scorer registration needs a name and a scorer");
  }
  scorers_[std::move(name)] = std::move(scorer);
}

bool ScorerRegistry::Contains(std::string_view name) const {
  return scorers_.find(name) != scorers_.end();
}

std::shared_ptr<RelevanceScorer> ScorerRegistry::Find(
    std::string_view name) const {
  auto it = scorers_.find(name);
  if (it == scorers_.end()) {
    throw Error(ErrorCode::kPipeline,
                "relevance scorer '" + std::string(name) + "' is unavailable");
  }
  return it->second;
}

std::vector<double> ScoreChecked(RelevanceScorer& scorer,
                                 std::span<const ScoringPair> pairs) {
  if (pairs.empty()) return {};
  std::vector<double> scores = scorer.ScoreBatch(pairs);
  if (scores.size() != pairs.size()) {
    throw Error(ErrorCode::kPipeline,
                "relevance scorer '" + scorer.name() + "' returned " +
                    std::to_string(scores.size()) + " scores for " +
                    std::to_string(pairs.size()) + " pairs");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw Error(ErrorCode::kPipeline,
                  "relevance scorer '" + scorer.name() + "' returned score " +
                      std::to_string(scores[i]) + " outside [0, 1] for pair '" +
                      pairs[i].pair_id + "'");
    }
  }
  return scores;
}

double VerifyRelevance(std::string_view prompt_input, std::string_view response,
                       RelevanceScorer& scorer) {
  if (EmptyResponse(response)) return 0.0;
  const ScoringPair pair{"0", std::string(prompt_input), std::string(response)};
  return ScoreChecked(scorer, std::span<const ScoringPair>(&pair, 1)).front();
}

void ValidateConstraintSpec(const ConstraintSpec& spec) {
  const std::string where = "constraint '" + spec.name + "': ";
  if (spec.name.empty()) ThrowConfigError("constraint name must be non-empty");
  if (!std::isfinite(spec.weight) || spec.weight < 0.0) {
    ThrowConfigError(where + "weight must be a finite nonnegative number");
  }
  if (spec.declared_arity && *spec.declared_arity != spec.arity()) {
    ThrowConfigError(where + "kind " +
                     std::string(ConstraintKindName(spec.kind)) +
                     " has arity " + std::string(ArityName(spec.arity())) +
                     ", not " + std::string(ArityName(*spec.declared_arity)));
  }
  switch (spec.kind) {
    case ConstraintKind::kLabelOption:
      if (spec.options.empty()) {
        ThrowConfigError(where + "label_option requires non-empty options");
      }
      break;
    case ConstraintKind::kLabelHierarchy: {
      if (spec.fine2coarse.empty()) {
        ThrowConfigError(where + "label_hierarchy requires fine2coarse");
      }
      if (!spec.options.empty()) {
        const auto options = NormalizeOptions(spec.options, spec.match);
        for (const auto& [fine, coarse] : spec.fine2coarse) {
          if (options.count(NormalizeLabel(coarse, spec.match)) == 0) {
            ThrowConfigError(where + "coarse type '" + coarse +
                             "' (of '" + fine + "') is not a declared option");
          }
        }
      }
      break;
    }
    case ConstraintKind::kExtractiveness:
      break;
    case ConstraintKind::kRelevance:
      if (spec.relevance.scorer == RelevanceScorerKind::kExternal &&
          spec.relevance.external.empty()) {
        ThrowConfigError(where + "external relevance scorer needs a name");
      }
      break;
    case ConstraintKind::kTemporalConsistency:
      temporal::ValidateDisjointness(spec.temporal.disjointness);
      if (spec.temporal.candidates_per_member < 1) {
        ThrowConfigError(where + "candidates_per_member must be >= 1");
      }
      if (spec.temporal.enumeration_cap < 1) {
        ThrowConfigError(where + "enumeration_cap must be >= 1");
      }
      if (spec.temporal.greedy_sweeps < 1) {
        ThrowConfigError(where + "greedy_sweeps must be >= 1");
      }
      break;
  }
  if (spec.match.delimiter.empty()) {
    ThrowConfigError(where + "delimiter must be non-empty");
  }
}

ConstraintEvaluator::ConstraintEvaluator(std::vector<ConstraintSpec> specs,
                                         CompositeSpec composite,
                                         const ScorerRegistry* registry)
    : specs_(std::move(specs)), composite_(composite) {
  if (specs_.empty()) {
    ThrowConfigError("at least one response-level constraint is required");
  }
  std::set<std::string> names;
  double total_weight = 0.0;
  for (const ConstraintSpec& spec : specs_) {
    ValidateConstraintSpec(spec);
    if (spec.arity() == Arity::kGroup) {
      ThrowConfigError("constraint '" + spec.name +
                       "' has group arity and cannot be evaluated per "
                       "response");
    }
    if (!names.insert(spec.name).second) {
      ThrowConfigError("duplicate constraint name '" + spec.name + "'");
    }
    total_weight += spec.weight;

    Compiled compiled;
    switch (spec.kind) {
      case ConstraintKind::kLabelOption:
        compiled.options = NormalizeOptions(spec.options, spec.match);
        break;
      case ConstraintKind::kLabelHierarchy:
        compiled.fine2coarse = IsNormalized(spec.match)
                                   ? NormalizeHierarchy(spec.fine2coarse,
                                                        spec.match)
                                   : spec.fine2coarse;
        break;
      case ConstraintKind::kRelevance:
        if (spec.relevance.scorer == RelevanceScorerKind::kLexicalRecall) {
          compiled.scorer =
              std::make_shared<LexicalRecallScorer>(spec.relevance.stopwords);
        } else {
          if (registry == nullptr ||
              !registry->Contains(spec.relevance.external)) {
            ThrowConfigError("constraint '" + spec.name +
                             "': external scorer '" + spec.relevance.external +
                             "' is not registered");
          }
          compiled.scorer = registry->Find(spec.relevance.external);
        }
        break;
      default:
        break;
    }
    compiled_.push_back(std::move(compiled));
  }
  if (composite_.combinator == Combinator::kWeightedMean &&
      total_weight <= 0.0) {
    ThrowConfigError("weighted_mean requires at least one positive weight");
  }
}

double ConstraintEvaluator::EvaluateLocal(
    std::size_t index, const Instance& instance,
    const CandidateResponse& candidate) const {
  const ConstraintSpec& spec = specs_[index];
  const Compiled& compiled = compiled_[index];
  switch (spec.kind) {
    case ConstraintKind::kLabelOption:
      return LabelOptionWithSet(candidate.text, compiled.options, spec.match);
    case ConstraintKind::kLabelHierarchy:
      return LabelHierarchyWithMap(candidate.text, compiled.fine2coarse,
                                      spec.match);
    case ConstraintKind::kExtractiveness:
      return VerifyExtractiveness(instance.prompt, candidate.text, spec.match);
    case ConstraintKind::kRelevance:
      return VerifyRelevance(instance.prompt, candidate.text, *compiled.scorer);
    case ConstraintKind::kTemporalConsistency:
      break;
  }
  ThrowInternalError("group constraint reached the per-response evaluator");
}

CsrScore ConstraintEvaluator::Evaluate(
    const Instance& instance, const CandidateResponse& candidate) const {
  std::vector<CsrPart> parts;
  parts.reserve(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    parts.push_back({specs_[i].name, EvaluateLocal(i, instance, candidate),
                     specs_[i].weight});
  }
  return MakeCsrScore(std::move(parts), composite_);
}

std::vector<std::vector<CsrScore>> ConstraintEvaluator::EvaluateBatch(
    std::span<const Instance> instances) const {
  // values[s][flat candidate index]
  std::size_t flat_count = 0;
  for (const Instance& inst : instances) flat_count += inst.candidates.size();
  std::vector<std::vector<double>> values(specs_.size());

  for (std::size_t s = 0; s < specs_.size(); ++s) {
    std::vector<double>& column = values[s];
    column.assign(flat_count, 0.0);
    const ConstraintSpec& spec = specs_[s];
    if (spec.kind == ConstraintKind::kRelevance) {
      std::vector<ScoringPair> pairs;
      std::vector<std::size_t> slots;
      std::size_t flat = 0;
      for (const Instance& inst : instances) {
        for (const CandidateResponse& c : inst.candidates) {
          if (!EmptyResponse(c.text)) {
            pairs.push_back({inst.instance_id + "/" + c.candidate_id,
                             inst.prompt, c.text});
            slots.push_back(flat);
          }
          ++flat;
        }
      }
      const std::vector<double> scores =
          ScoreChecked(*compiled_[s].scorer, pairs);
      for (std::size_t i = 0; i < slots.size(); ++i) {
        column[slots[i]] = scores[i];
      }
      continue;
    }
    std::size_t flat = 0;
    for (const Instance& inst : instances) {
      for (const CandidateResponse& c : inst.candidates) {
        column[flat++] = EvaluateLocal(s, inst, c);
      }
    }
  }

  std::vector<std::vector<CsrScore>> out;
  out.reserve(instances.size());
  std::size_t flat = 0;
  for (const Instance& inst : instances) {
    std::vector<CsrScore> row;
    row.reserve(inst.candidates.size());
    for (std::size_t c = 0; c < inst.candidates.size(); ++c, ++flat) {
      std::vector<CsrPart> parts;
      parts.reserve(specs_.size());
      for (std::size_t s = 0; s < specs_.size(); ++s) {
        parts.push_back({specs_[s].name, values[s][flat], specs_[s].weight});
      }
      row.push_back(MakeCsrScore(std::move(parts), composite_));
    }
    out.push_back(std::move(row));
  }
  return out;
}

CsrScore EvaluateInstance(const Instance& instance,
                          const CandidateResponse& candidate,
                          const std::vector<ConstraintSpec>& specs,
                          const CompositeSpec& composite,
                          const ScorerRegistry* registry) {
  return ConstraintEvaluator(specs, composite, registry)
      .Evaluate(instance, candidate);
}

}  // namespace prefsynth

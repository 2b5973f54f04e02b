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

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "oracles/oracles.h"
#include "prefsynth/error.h"
#include "prefsynth/verifiers.h"

namespace prefsynth {
namespace {

const std::vector<std::string> kOptions = {"person", "artist", "location"};

MatchOptions Literal() {
  MatchOptions m;
  m.mode = MatchMode::kLiteral;
  m.case_sensitive = true;
  return m;
}

Instance MakeInstance(std::string prompt, std::vector<std::string> texts) {
  Instance inst{"i", std::nullopt, std::move(prompt), std::nullopt, {}};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    inst.candidates.push_back({"c" + std::to_string(i), texts[i], -1.0, 1});
  }
  return inst;
}

TEST(LabelOptionTest, Examples) {
  EXPECT_EQ(VerifyLabelOption("person, artist", kOptions), 1.0);
  const std::vector<std::string> two = {"person", "artist"};
  EXPECT_EQ(VerifyLabelOption("person, singer", two), 0.0);
  EXPECT_EQ(VerifyLabelOption("", kOptions), 0.0);
  EXPECT_EQ(VerifyLabelOption("   ", kOptions), 0.0);
}

TEST(LabelOptionTest, NormalizedTrimsAndFoldsCase) {
  EXPECT_EQ(VerifyLabelOption(" Person ,  ARTIST", kOptions,
                              {",", false, MatchMode::kNormalized}),
            1.0);
  MatchOptions cs;
  cs.case_sensitive = true;
  EXPECT_EQ(VerifyLabelOption("Person", kOptions, cs), 0.0);
}

TEST(LabelOptionTest, LiteralKeepsPythonSemantics) {
  // "".split(", ") == [""] and "" is not an option.
  EXPECT_EQ(VerifyLabelOption("", kOptions, Literal()), 0.0);
  EXPECT_EQ(VerifyLabelOption("person,artist", kOptions, Literal()), 0.0);
  EXPECT_EQ(VerifyLabelOption("person, ", kOptions, Literal()), 0.0);
}

TEST(LabelHierarchyTest, Examples) {
  const Fine2Coarse f2c = {{"artist", "person"}};
  EXPECT_EQ(VerifyLabelHierarchy("person, artist", f2c), 1.0);
  EXPECT_EQ(VerifyLabelHierarchy("artist", f2c), 0.0);
  EXPECT_EQ(VerifyLabelHierarchy("location", f2c), 1.0);
}

TEST(ExtractivenessTest, Examples) {
  EXPECT_EQ(VerifyExtractiveness("the troops withdrew on Monday", "withdrew"),
            1.0);
  EXPECT_EQ(VerifyExtractiveness("the troops withdrew", "attacked"), 0.0);
  EXPECT_EQ(VerifyExtractiveness("a  b", "a b"), 1.0);
  EXPECT_EQ(VerifyExtractiveness("a  b", "a b", Literal()), 0.0);
  EXPECT_EQ(VerifyExtractiveness("abc", ""), 0.0);
  EXPECT_EQ(VerifyExtractiveness("abc", "", Literal()), 1.0);
}

TEST(ExtractivenessTest, NormalizedAgreesWithNormalizeThenSubstring) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab \t\n";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  auto gen = [&] {
    std::string s;
    for (int n = len(rng); n > 0; --n) s.push_back(alphabet[pick(rng)]);
    return s;
  };
  auto normalize = [](const std::string& s) {
    std::string out;
    bool pending = false;
    for (char ch : s) {
      if (ch == ' ' || ch == '\t' || ch == '\n') {
        pending = !out.empty();
      } else {
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(ch);
      }
    }
    return out;
  };
  for (int i = 0; i < 3000; ++i) {
    const std::string input = gen(), response = gen();
    const std::string r = normalize(response);
    const int expected = r.empty() ? 0 : oracle::Extractiveness(normalize(input), r);
    EXPECT_EQ(VerifyExtractiveness(input, response), expected)
        << "input='" << input << "' response='" << response << "'";
  }
}

TEST(ReferenceSemanticsTest, RandomAgreementInLiteralMode) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> vocab = {"person", "artist", "location",
                                          "city",   "org",    "company",
                                          "",       " person", "Person"};
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> count(0, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> options;
    for (int n = count(rng); n > 0; --n) options.push_back(vocab[word(rng)]);
    Fine2Coarse f2c;
    for (int n = count(rng); n > 0; --n) f2c[vocab[word(rng)]] = vocab[word(rng)];
    std::string response;
    for (int n = count(rng) + 1; n > 0; --n) {
      if (!response.empty() || rng() % 2) response += ", ";
      response += vocab[word(rng)];
    }
    const auto answers = oracle::PySplit(response, ", ");
    EXPECT_EQ(VerifyLabelOption(response, options, Literal()),
              oracle::LabelOption(answers, options));
    EXPECT_EQ(VerifyLabelHierarchy(response, f2c, Literal()),
              oracle::LabelHierarchy(answers, f2c));
  }
}

TEST(LexicalRecallTest, Examples) {
  EXPECT_DOUBLE_EQ(LexicalRecall("the cat sat on the mat", "cat mat"), 1.0);
  EXPECT_DOUBLE_EQ(LexicalRecall("alpha beta", "gamma delta"), 0.0);
  EXPECT_DOUBLE_EQ(LexicalRecall("same words here", "same words here"), 1.0);
  EXPECT_DOUBLE_EQ(LexicalRecall("cat", "cat dog"), 0.5);
  // Clipped counts: the input has one "cat".
  EXPECT_DOUBLE_EQ(LexicalRecall("cat", "cat cat"), 0.5);
  EXPECT_DOUBLE_EQ(LexicalRecall("Cat!", "cat"), 1.0);
  EXPECT_DOUBLE_EQ(LexicalRecall("x", ""), 0.0);
  EXPECT_DOUBLE_EQ(LexicalRecall("the cat", "the dog", {"the"}), 0.0);
}

TEST(LexicalRecallTest, MatchesCountingOracleOnRandomText) {
  std::mt19937_64 rng(23);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<std::size_t> w(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 8);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> in, resp;
    for (int n = len(rng); n > 0; --n) in.push_back(vocab[w(rng)]);
    for (int n = len(rng); n > 0; --n) resp.push_back(vocab[w(rng)]);
    std::map<std::string, int> avail;
    for (const auto& t : in) ++avail[t];
    int hit = 0;
    for (const auto& t : resp) {
      if (avail[t] > 0) {
        --avail[t];
        ++hit;
      }
    }
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& t : v) s += t + " ";
      return s;
    };
    EXPECT_DOUBLE_EQ(LexicalRecall(join(in), join(resp)),
                     static_cast<double>(hit) / resp.size());
  }
}

class FixedScorer : public RelevanceScorer {
 public:
  explicit FixedScorer(double value, int extra = 0)
      : value_(value), extra_(extra) {}
  std::string name() const override { return "fixed"; }
  std::vector<double> ScoreBatch(std::span<const ScoringPair> pairs) override {
    ++calls;
    return std::vector<double>(pairs.size() + extra_, value_);
  }
  int calls = 0;

 private:
  double value_;
  int extra_;
};

TEST(ScorerTest, ScoreCheckedEnforcesContract) {
  const std::vector<ScoringPair> pairs = {{"p", "a", "a"}};
  FixedScorer bad_range(1.5);
  try {
    ScoreChecked(bad_range, pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPipeline);
    EXPECT_NE(std::string(e.what()).find("fixed"), std::string::npos);
  }
  FixedScorer bad_count(0.5, 1);
  EXPECT_THROW(ScoreChecked(bad_count, pairs), Error);
  FixedScorer ok(0.25);
  EXPECT_EQ(ScoreChecked(ok, pairs), std::vector<double>{0.25});
}

TEST(ScorerTest, RegistryUnknownNameIsPipelineError) {
  ScorerRegistry registry;
  registry.Register("fixed", std::make_shared<FixedScorer>(1.0));
  EXPECT_TRUE(registry.Contains("fixed"));
  try {
    registry.Find("bertscore");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPipeline);
  }
}

ConstraintSpec OptionSpec() {
  ConstraintSpec s;
  s.name = "options";
  s.kind = ConstraintKind::kLabelOption;
  s.options = {"person", "artist", "location"};
  return s;
}

ConstraintSpec HierarchySpec() {
  ConstraintSpec s;
  s.name = "hierarchy";
  s.kind = ConstraintKind::kLabelHierarchy;
  s.fine2coarse = {{"artist", "person"}};
  return s;
}

TEST(EvaluatorTest, CompositeExamples) {
  const Instance inst = MakeInstance("", {"artist", "person, artist", "x"});
  ConstraintEvaluator min_eval({OptionSpec(), HierarchySpec()},
                               {Combinator::kMin});
  EXPECT_EQ(min_eval.Evaluate(inst, inst.candidates[0]).value, 0.0);
  EXPECT_EQ(min_eval.Evaluate(inst, inst.candidates[1]).value, 1.0);
  ConstraintEvaluator mean_eval({OptionSpec(), HierarchySpec()},
                                {Combinator::kWeightedMean});
  const CsrScore s = mean_eval.Evaluate(inst, inst.candidates[0]);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
  ASSERT_EQ(s.parts.size(), 2u);
  EXPECT_EQ(s.parts[0].value, 1.0);
  EXPECT_EQ(s.parts[1].value, 0.0);
}

TEST(EvaluatorTest, ConfigErrors) {
  auto expect_config = [](auto fn) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig) << e.what();
    }
  };
  expect_config([] {
    ConstraintSpec t;
    t.name = "t";
    t.kind = ConstraintKind::kTemporalConsistency;
    ConstraintEvaluator({t}, {});
  });
  expect_config([] { ConstraintEvaluator({OptionSpec(), OptionSpec()}, {}); });
  expect_config([] {
    ConstraintSpec s = OptionSpec();
    s.declared_arity = Arity::kPromptResponse;
    ConstraintEvaluator({s}, {});
  });
  expect_config([] {
    ConstraintSpec s = OptionSpec();
    s.options.clear();
    ConstraintEvaluator({s}, {});
  });
  expect_config([] {
    ConstraintSpec s = OptionSpec();
    s.weight = 0;
    ConstraintEvaluator({s}, {Combinator::kWeightedMean});
  });
  expect_config([] {
    ConstraintSpec s;
    s.name = "rel";
    s.kind = ConstraintKind::kRelevance;
    s.relevance.scorer = RelevanceScorerKind::kExternal;
    s.relevance.external = "missing";
    ScorerRegistry empty;
    ConstraintEvaluator({s}, {}, &empty);
  });
}

TEST(EvaluatorTest, BatchMatchesSingleAndBatchesRelevance) {
  auto scorer = std::make_shared<FixedScorer>(0.5);
  ScorerRegistry registry;
  registry.Register("fixed", scorer);
  ConstraintSpec rel;
  rel.name = "rel";
  rel.kind = ConstraintKind::kRelevance;
  rel.relevance.scorer = RelevanceScorerKind::kExternal;
  rel.relevance.external = "fixed";
  ConstraintSpec ext;
  ext.name = "ext";
  ext.kind = ConstraintKind::kExtractiveness;
  ConstraintEvaluator eval({rel, ext}, {Combinator::kWeightedMean}, &registry);
  const std::vector<Instance> batch = {
      MakeInstance("a b c", {"b", "z"}), MakeInstance("x y", {"x y", "y x", "q"})};
  const auto scores = eval.EvaluateBatch(batch);
  EXPECT_EQ(scorer->calls, 1);
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_DOUBLE_EQ(scores[0][0].value, 0.75);
  EXPECT_DOUBLE_EQ(scores[0][1].value, 0.25);
  EXPECT_DOUBLE_EQ(scores[1][0].value, 0.75);
  EXPECT_DOUBLE_EQ(scores[1][1].value, 0.25);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t c = 0; c < batch[i].candidates.size(); ++c) {
      EXPECT_EQ(scores[i][c].value,
                eval.Evaluate(batch[i], batch[i].candidates[c]).value);
    }
  }
}

TEST(EvaluatorTest, PureAcrossRepeatedCalls) {
  const Instance inst = MakeInstance("p", {"person, artist", "artist"});
  ConstraintEvaluator eval({OptionSpec(), HierarchySpec()}, {});
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(eval.Evaluate(inst, inst.candidates[0]).value, 1.0);
    EXPECT_EQ(eval.Evaluate(inst, inst.candidates[1]).value, 0.5);
  }
}

TEST(KindTest, ArityAndNames) {
  EXPECT_EQ(ArityOf(ConstraintKind::kLabelOption), Arity::kResponseOnly);
  EXPECT_EQ(ArityOf(ConstraintKind::kRelevance), Arity::kPromptResponse);
  EXPECT_EQ(ArityOf(ConstraintKind::kTemporalConsistency), Arity::kGroup);
  for (auto k : {ConstraintKind::kLabelOption, ConstraintKind::kLabelHierarchy,
                 ConstraintKind::kExtractiveness, ConstraintKind::kRelevance,
                 ConstraintKind::kTemporalConsistency}) {
    EXPECT_EQ(ParseConstraintKind(ConstraintKindName(k)), k);
  }
  EXPECT_FALSE(ParseConstraintKind("bogus").has_value());
}

}  // namespace
}  // namespace prefsynth

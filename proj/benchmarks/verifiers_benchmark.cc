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

#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "prefsynth/verifiers.h"

namespace prefsynth {
namespace {

const std::vector<std::string> kOptions = {
    "person", "artist", "athlete", "location", "city", "country",
    "organization", "company", "event", "product"};
const Fine2Coarse kFine2Coarse = {{"artist", "person"},
                                  {"athlete", "person"},
                                  {"city", "location"},
                                  {"country", "location"},
                                  {"company", "organization"}};

void BM_LabelOption(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        VerifyLabelOption("person, artist, athlete", kOptions));
  }
}
BENCHMARK(BM_LabelOption);

void BM_LabelHierarchy(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        VerifyLabelHierarchy("person, artist, city", kFine2Coarse));
  }
}
BENCHMARK(BM_LabelHierarchy);

void BM_Extractiveness(benchmark::State& state) {
  std::string input;
  for (int i = 0; i < state.range(0); ++i) input += "word" + std::to_string(i) + " ";
  for (auto _ : state) {
    benchmark::DoNotOptimize(VerifyExtractiveness(input, "word7 word8"));
  }
  state.SetBytesProcessed(state.iterations() * input.size());
}
BENCHMARK(BM_Extractiveness)->Arg(16)->Arg(256)->Arg(4096);

void BM_LexicalRecall(benchmark::State& state) {
  const std::string input =
      "the troops withdrew from the border town on monday after talks";
  for (auto _ : state) {
    benchmark::DoNotOptimize(LexicalRecall(input, "troops withdrew monday"));
  }
}
BENCHMARK(BM_LexicalRecall);

void BM_EvaluateComposite(benchmark::State& state) {
  ConstraintSpec option;
  option.name = "label_option";
  option.kind = ConstraintKind::kLabelOption;
  option.options = kOptions;
  ConstraintSpec hierarchy;
  hierarchy.name = "label_hierarchy";
  hierarchy.kind = ConstraintKind::kLabelHierarchy;
  hierarchy.fine2coarse = kFine2Coarse;
  const ConstraintEvaluator evaluator({option, hierarchy}, {Combinator::kMin});
  const Instance inst{"i", std::nullopt, "p", std::nullopt,
                      {{"c", "person, artist", -1.0, 3}}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluator.Evaluate(inst, inst.candidates[0]));
  }
}
BENCHMARK(BM_EvaluateComposite);

}  // namespace
}  // namespace prefsynth

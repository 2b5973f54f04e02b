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
#include "prefsynth/config.h"
#include "prefsynth/loss_oracle.h"
#include "prefsynth/mock_sampler.h"
#include "prefsynth/pipeline.h"
#include "prefsynth/records.h"

namespace prefsynth {
namespace {

const char kConfig[] = R"(version: 1
composite:
  combinator: weighted_mean
constraints:
  - name: label_option
    kind: label_option
    options: [person, artist, location, city, organization, company]
  - name: label_hierarchy
    kind: label_hierarchy
    fine2coarse: {artist: person, city: location, company: organization}
sampler:
  satisfying: ["person, artist", "location, city", "organization"]
  violating: ["artist", "person, singer", "city"]
workers: 1
)";

std::vector<Instance> Corpus(const PipelineConfig& config, int count) {
  std::vector<Instance> out;
  for (int i = 0; i < count; ++i) {
    Instance inst;
    inst.instance_id = "i" + std::to_string(i);
    inst.prompt = "prompt " + std::to_string(i);
    inst.candidates = MockSample(inst.prompt, 4, 1, config.sampler);
    out.push_back(std::move(inst));
  }
  return out;
}

void BM_BuildPreferences(benchmark::State& state) {
  const PipelineConfig config = ParseConfig(kConfig);
  const std::vector<Instance> corpus = Corpus(config, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildPreferences(config, corpus));
  }
  state.SetItemsProcessed(state.iterations() * corpus.size());
}
BENCHMARK(BM_BuildPreferences)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ParseInstance(benchmark::State& state) {
  const PipelineConfig config = ParseConfig(kConfig);
  const std::string line = SerializeInstance(Corpus(config, 1).front());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ParseInstance(line));
  }
  state.SetBytesProcessed(state.iterations() * line.size());
}
BENCHMARK(BM_ParseInstance);

void BM_RankLoss(benchmark::State& state) {
  std::vector<ScoredCandidate> candidates;
  for (int i = 0; i < state.range(0); ++i) {
    candidates.push_back({"c", (i % 5) / 4.0, -0.1 * i});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(RankLoss(candidates));
  }
}
BENCHMARK(BM_RankLoss)->Arg(4)->Arg(16)->Arg(64);

}  // namespace
}  // namespace prefsynth

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

#include <random>
#include <string>

#include "benchmark/benchmark.h"
#include "prefsynth/temporal.h"

namespace prefsynth::temporal {
namespace {

QuestionGroup MakeGroup(int k, int m) {
  std::mt19937_64 rng(k * 131 + m);
  QuestionGroup group{"g", {}};
  for (int i = 0; i < k; ++i) {
    GroupMember member{"q" + std::to_string(i), static_cast<Role>(i % 3), {}};
    for (int c = 0; c < m; ++c) {
      EventSet answers;
      for (int e = 0; e < 8; ++e) {
        if (rng() % 4 == 0) answers.insert("e" + std::to_string(e));
      }
      member.candidates.push_back(
          {"c" + std::to_string(c), answers, -static_cast<double>(rng() % 100) / 10});
    }
    group.members.push_back(std::move(member));
  }
  return group;
}

void BM_ResolveGroup(benchmark::State& state) {
  const int k = state.range(0);
  const QuestionGroup group = MakeGroup(k, 2);
  ResolveOptions options;
  options.keep_all = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ResolveGroup(group, DefaultDisjointness(), options));
  }
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << k));
}
BENCHMARK(BM_ResolveGroup)->DenseRange(1, 12, 1);

void BM_ResolveGroupGreedy(benchmark::State& state) {
  const QuestionGroup group = MakeGroup(state.range(0), 3);
  ResolveOptions options;
  options.candidates_per_member = 3;
  options.enumeration_cap = 1;
  options.fallback = Fallback::kGreedy;
  options.keep_all = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ResolveGroup(group, DefaultDisjointness(), options));
  }
}
BENCHMARK(BM_ResolveGroupGreedy)->Arg(16)->Arg(64);

void BM_CountConflicts(benchmark::State& state) {
  const std::map<Role, EventSet> assignment = {
      {Role::kBefore, {"a", "b", "c", "d"}},
      {Role::kDuring, {"c", "e"}},
      {Role::kAfter, {"d", "e", "f"}}};
  const auto pairs = DefaultDisjointness();
  for (auto _ : state) {
    benchmark::DoNotOptimize(CountConflicts(assignment, pairs));
  }
}
BENCHMARK(BM_CountConflicts);

}  // namespace
}  // namespace prefsynth::temporal

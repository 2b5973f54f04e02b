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

#ifndef PREFSYNTH_MOCK_SAMPLER_H_
#define PREFSYNTH_MOCK_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "prefsynth/types.h"

namespace prefsynth {

// Stand-in for the external generator used in tests and demos. The real
// pipeline consumes candidates produced elsewhere (for example by diverse
// beam search with four beams, four beam groups and diversity penalty 1).
struct MockSamplerConfig {
  std::vector<std::string> satisfying;
  std::vector<std::string> violating;
  double violation_rate = 0.5;
  // Per-token log-probability range for synthetic scores.
  double min_token_logprob = -2.0;
  double max_token_logprob = -0.05;
};

void ValidateMockSamplerConfig(const MockSamplerConfig& config);

// Deterministic SplitMix64-seeded xoshiro256** stream. Unlike the standard
// distributions its output is identical on every platform.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed);
  std::uint64_t Next();
  double Uniform();                        // [0, 1)
  std::size_t Below(std::size_t bound);    // [0, bound)

 private:
  std::uint64_t s_[4];
};

// 64-bit FNV-1a.
std::uint64_t StableHash(std::string_view data);

// n candidates for `prompt`. Each candidate is drawn from the violating
// pool with probability violation_rate, otherwise from the satisfying pool;
// ids are "c0", "c1", ... The stream depends on (seed, prompt) only.
std::vector<CandidateResponse> MockSample(std::string_view prompt,
                                          std::size_t n, std::uint64_t seed,
                                          const MockSamplerConfig& config);

}  // namespace prefsynth

#endif  // PREFSYNTH_MOCK_SAMPLER_H_

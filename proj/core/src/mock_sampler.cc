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

#include "prefsynth/mock_sampler.h"

#include <cmath>

#include "prefsynth/error.h"
#include "prefsynth/text.h"

namespace prefsynth {
namespace {

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SplitRng::SplitRng(std::uint64_t seed) {
  for (std::uint64_t& word : s_) word = SplitMix64(seed);
}

std::uint64_t SplitRng::Next() {
  const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double SplitRng::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

std::size_t SplitRng::Below(std::size_t bound) {
  if (bound == 0) return 0;
  // Modulo bias is negligible for pool-sized bounds.
  return static_cast<std::size_t>(Next() % bound);
}

std::uint64_t StableHash(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ValidateMockSamplerConfig(const MockSamplerConfig& config) {
  if (!(config.violation_rate >= 0.0 && config.violation_rate <= 1.0)) {
    ThrowConfigError("sampler violation_rate must be in [0, 1]");
  }
  if (config.violation_rate < 1.0 && config.satisfying.empty()) {
    ThrowConfigError("sampler needs a non-empty satisfying pool");
  }
  if (config.violation_rate > 0.0 && config.violating.empty()) {
    ThrowConfigError("sampler needs a non-empty violating pool");
  }
  if (!(config.min_token_logprob <= config.max_token_logprob &&
        config.max_token_logprob <= 0.0)) {
    ThrowConfigError(
        "sampler token log-probabilities need min <= max <= 0");
  }
}

std::vector<CandidateResponse> MockSample(std::string_view prompt,
                                          std::size_t n, std::uint64_t seed,
                                          const MockSamplerConfig& config) {
  if (n < 1) ThrowInputError("mock sampler needs n >= 1");
  ValidateMockSamplerConfig(config);
  SplitRng rng(seed ^ StableHash(prompt));
  std::vector<CandidateResponse> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool violate = rng.Uniform() < config.violation_rate;
    const std::vector<std::string>& pool =
        violate ? config.violating : config.satisfying;
    CandidateResponse c;
    c.candidate_id = "c" + std::to_string(i);
    c.text = pool[rng.Below(pool.size())];
    const std::size_t words = text::WordTokens(c.text).size();
    c.token_count = static_cast<std::int64_t>(words == 0 ? 1 : words);
    const double per_token =
        config.min_token_logprob +
        rng.Uniform() * (config.max_token_logprob - config.min_token_logprob);
    // Rounded so that serialized values are short and stable.
    c.sum_logprob =
        std::round(per_token * static_cast<double>(c.token_count) * 1e6) / 1e6;
    if (c.sum_logprob >= 0.0) c.sum_logprob = 0.0;  // no negative zero
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace prefsynth

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

#ifndef PREFSYNTH_CONFIG_H_
#define PREFSYNTH_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prefsynth/loss_oracle.h"
#include "prefsynth/mock_sampler.h"
#include "prefsynth/preference.h"
#include "prefsynth/verifiers.h"

namespace prefsynth {

inline constexpr int kConfigVersion = 1;

struct ExternalScorerConfig {
  std::string name;
  std::vector<std::string> command;  // argv
};

struct IoPaths {
  std::filesystem::path input;
  std::filesystem::path preferences;
  std::filesystem::path ranked;      // optional ranked-list output
  std::filesystem::path scored;      // optional per-candidate scores
  std::filesystem::path losses;      // used with emit_loss
  std::filesystem::path report;      // JSON run report; table goes to .txt
  std::filesystem::path rejects;     // malformed-line sidecar
  std::filesystem::path validation;  // holdout preferences
};

struct PipelineConfig {
  int version = kConfigVersion;
  std::vector<ConstraintSpec> constraints;
  CompositeSpec composite;
  std::vector<ExternalScorerConfig> scorers;
  SelectionPolicy selection;
  MarginSettings margin;
  ScoreMode score_mode = ScoreMode::kLengthNormalized;
  bool loss_reweighted = true;
  std::size_t loss_ft_top_k = 1;
  double reject_fraction = 0.1;
  double holdout_fraction = 0.0;
  std::uint64_t seed = 0;
  bool deterministic_order = false;
  bool emit_loss = false;
  std::size_t workers = 0;  // 0 selects std::thread::hardware_concurrency
  std::size_t batch_size = 512;
  MockSamplerConfig sampler;
  IoPaths io;

  // The temporal_consistency constraint, if any.
  const ConstraintSpec* GroupConstraint() const;
  // Response-only and prompt-response constraints, in declaration order.
  std::vector<ConstraintSpec> InstanceConstraints() const;
  LossOptions MakeLossOptions() const;
};

// Parses a YAML document. Unknown keys, wrong types and unsupported versions
// are config errors; the result is fully validated.
PipelineConfig ParseConfig(const std::string& yaml_text);
PipelineConfig LoadConfig(const std::filesystem::path& path);

// Cross-field validation; run again after command-line overrides.
void ValidateConfig(const PipelineConfig& config);

}  // namespace prefsynth

#endif  // PREFSYNTH_CONFIG_H_

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

#ifndef PREFSYNTH_PIPELINE_H_
#define PREFSYNTH_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefsynth/config.h"
#include "prefsynth/loss_oracle.h"
#include "prefsynth/preference.h"
#include "prefsynth/records.h"
#include "prefsynth/report.h"
#include "prefsynth/verifiers.h"

namespace prefsynth {

// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
// concurrency). The first exception thrown by any task is rethrown.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

// Subprocess-backed scorers for every entry of config.scorers.
ScorerRegistry MakeScorerRegistry(const PipelineConfig& config);

// Scores and group resolutions for a whole dataset, index-aligned with
// `instances`.
struct VerifiedDataset {
  std::vector<Instance> instances;
  // Final per-candidate CSR. Empty for instances that could not be scored.
  std::vector<std::vector<CsrScore>> scores;
  // group_combination records of instances resolved through a group.
  std::vector<std::vector<PreferenceRecord>> group_records;
  std::vector<bool> grouped;
  // Non-empty when the instance was excluded before pair selection.
  std::vector<std::string> skip_reason;
  RunReport report;  // score statistics and group stats only
};

VerifiedDataset VerifyInstances(const PipelineConfig& config,
                                std::vector<Instance> instances,
                                const ScorerRegistry* registry = nullptr);

struct InstanceOutputs {
  std::vector<PreferenceRecord> records;
  std::optional<RankedRecord> ranked;
  std::optional<LossReport> loss;
  std::string skip_reason;  // set when `records` is empty
};

InstanceOutputs BuildInstanceOutputs(const PipelineConfig& config,
                                     const VerifiedDataset& data,
                                     std::size_t index);

// Whether the holdout split sends `key` (group_id, else instance_id) to the
// validation output.
bool IsHoldout(std::string_view key, std::uint64_t seed, double fraction);

std::string HoldoutKey(const Instance& instance);

// In-memory build with outputs in input order.
struct BuildResult {
  std::vector<PreferenceRecord> preferences;
  std::vector<PreferenceRecord> validation;
  std::vector<RankedRecord> ranked;
  std::vector<LossReport> losses;
  RunReport report;
};

BuildResult BuildPreferences(const PipelineConfig& config,
                             std::vector<Instance> instances,
                             const ScorerRegistry* registry = nullptr);

// File-to-file runs driven by config.io. Each throws prefsynth::Error with
// a phase-tagged message on failure.

// load -> verify -> resolve groups -> select pairs -> emit.
RunReport RunPipeline(const PipelineConfig& config);

// load -> verify -> resolve groups; writes io.scored.
RunReport RunVerify(const PipelineConfig& config);

// Loss reports for every instance of a scored file.
RunReport RunLosses(const PipelineConfig& config,
                    const std::filesystem::path& scored,
                    const std::filesystem::path& output);

// CSR statistics of a scored file.
RunReport SummarizeScoredFile(const std::filesystem::path& scored);

}  // namespace prefsynth

#endif  // PREFSYNTH_PIPELINE_H_

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

#include "prefsynth/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "prefsynth/error.h"
#include "prefsynth/external_scorer.h"
#include "prefsynth/mock_sampler.h"
#include "prefsynth/temporal.h"

namespace prefsynth {
namespace {

constexpr std::string_view kNoInstanceConstraints =
    "ungrouped_without_instance_constraints";
constexpr std::string_view kGroupInvalidRoles = "group_invalid_roles";
constexpr std::string_view kDegenerateGroupMember = "degenerate_group_member";
constexpr std::string_view kSingleCandidate = "single_candidate";
constexpr std::string_view kCsrTie = "csr_tie";
constexpr std::string_view kNoQualifyingPair = "no_qualifying_pair";

template <typename Fn>
auto InPhase(std::string_view phase, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    RethrowWithPhase(e, phase);
  }
}

std::size_t ResolveWorkers(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Margin of a group record; inherited CSRs are not ordered in general.
double GroupMargin(double csr_chosen, double csr_rejected,
                   const MarginSettings& settings) {
  if (csr_chosen >= csr_rejected) {
    return ComputeMargin(csr_chosen, csr_rejected, settings);
  }
  return settings.mode == MarginMode::kConstant ? settings.constant : 0.0;
}

struct GroupPlan {
  std::string group_id;
  std::vector<std::size_t> members;  // instance indices, input order
};

std::vector<GroupPlan> CollectGroups(const std::vector<Instance>& instances) {
  std::vector<GroupPlan> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].group_id) continue;
    auto [it, inserted] = index.emplace(*instances[i].group_id, groups.size());
    if (inserted) groups.push_back({*instances[i].group_id, {}});
    groups[it->second].members.push_back(i);
  }
  return groups;
}

struct GroupResult {
  std::size_t enumerated = 0;
  bool conflict_free = false;
  bool greedy = false;
  bool valid = false;
};

// Resolves one group and writes the members' temporal CSR part and
// group_combination records into `data`.
GroupResult ResolveOneGroup(const PipelineConfig& config,
                            const ConstraintSpec& group_spec,
                            const GroupPlan& plan, VerifiedDataset& data) {
  GroupResult result;
  temporal::QuestionGroup group;
  group.group_id = plan.group_id;
  for (std::size_t idx : plan.members) {
    const Instance& inst = data.instances[idx];
    std::optional<temporal::Role> role;
    if (inst.role) role = temporal::TryParseRole(*inst.role);
    if (!role) {
      for (std::size_t m : plan.members) {
        data.skip_reason[m] = std::string(kGroupInvalidRoles);
      }
      return result;
    }
    temporal::GroupMember member;
    member.instance_id = inst.instance_id;
    member.role = *role;
    for (const CandidateResponse& c : inst.candidates) {
      member.candidates.push_back(
          {c.candidate_id,
           temporal::ParseAnswerSet(c.text, group_spec.match.delimiter,
                                    !group_spec.match.case_sensitive),
           SequenceScore(c, config.score_mode)});
    }
    group.members.push_back(std::move(member));
  }

  temporal::ResolveOptions options;
  options.candidates_per_member = group_spec.temporal.candidates_per_member;
  options.enumeration_cap = group_spec.temporal.enumeration_cap;
  options.fallback = group_spec.temporal.fallback;
  options.greedy_sweeps = group_spec.temporal.greedy_sweeps;
  options.keep_all = false;
  temporal::Resolution resolution =
      temporal::ResolveGroup(group, group_spec.temporal.disjointness, options);
  result.valid = true;
  result.enumerated = resolution.enumerated;
  result.greedy = resolution.greedy;
  result.conflict_free = resolution.best.conflict_count == 0;

  const temporal::Combination& best = resolution.best;
  temporal::QuestionGroup probe = resolution.prepared;
  const std::vector<temporal::MemberPreference> prefs =
      temporal::PropagateLabels(best, resolution.prepared);

  for (std::size_t m = 0; m < plan.members.size(); ++m) {
    const std::size_t idx = plan.members[m];
    const Instance& inst = data.instances[idx];
    const std::string& chosen_id = best.selection.at(inst.instance_id);

    // Inherited CSR: the chosen candidate carries the best combination's
    // CSR; any other candidate carries the CSR of the best combination with
    // only this member swapped to it.
    std::vector<double> inherited(inst.candidates.size(), best.group_csr);
    std::vector<temporal::MemberCandidate> saved =
        std::move(probe.members[m].candidates);
    for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
      if (inst.candidates[c].candidate_id == chosen_id) continue;
      probe.members[m].candidates = {group.members[m].candidates[c]};
      std::vector<std::size_t> choice = best.choice;
      choice[m] = 0;
      inherited[c] =
          temporal::EvaluateCombination(probe, choice,
                                        group_spec.temporal.disjointness)
              .group_csr;
    }
    probe.members[m].candidates = std::move(saved);

    std::vector<CsrScore>& scores = data.scores[idx];
    if (scores.empty()) scores.resize(inst.candidates.size());
    for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
      std::vector<CsrPart> parts = std::move(scores[c].parts);
      parts.push_back({group_spec.name, inherited[c], group_spec.weight});
      scores[c] = MakeCsrScore(std::move(parts), config.composite);
    }

    auto find_candidate = [&](const std::string& id) -> std::size_t {
      for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
        if (inst.candidates[c].candidate_id == id) return c;
      }
      ThrowInternalError("unknown candidate '" + id + "'");
    };
    const std::size_t chosen = find_candidate(chosen_id);
    std::vector<PreferenceRecord>& records = data.group_records[idx];
    for (const std::string& id : prefs[m].dispreferred) {
      const std::size_t rejected = find_candidate(id);
      if (inst.candidates[rejected].text == inst.candidates[chosen].text) {
        continue;
      }
      if (records.size() >= config.selection.max_pairs_per_instance) break;
      PreferenceRecord r;
      r.instance_id = inst.instance_id;
      r.prompt = inst.prompt;
      r.chosen = inst.candidates[chosen];
      r.rejected = inst.candidates[rejected];
      r.csr_chosen = inherited[chosen];
      r.csr_rejected = inherited[rejected];
      r.margin = GroupMargin(r.csr_chosen, r.csr_rejected, config.margin);
      r.source = PreferenceSource::kGroupCombination;
      records.push_back(std::move(r));
    }
    data.grouped[idx] = true;
    if (records.empty()) {
      data.skip_reason[idx] = std::string(kDegenerateGroupMember);
    }
  }
  return result;
}

bool AllTied(const std::vector<CsrScore>& scores) {
  for (const CsrScore& s : scores) {
    if (std::abs(s.value - scores.front().value) > kCsrEpsilon) return false;
  }
  return true;
}

void CountSkip(RunReport& report, const std::string& reason) {
  ++report.instances_skipped;
  ++report.skip_reasons[reason];
}

void WriteRejects(const PipelineConfig& config, const LoadResult& loaded) {
  if (config.io.rejects.empty()) return;
  LineWriter writer(config.io.rejects);
  for (const RejectedLine& r : loaded.rejected) {
    writer.Write(SerializeRejectedLine(r));
  }
  writer.Close();
}

LoadResult LoadInput(const PipelineConfig& config) {
  return InPhase("load", [&] {
    if (config.io.input.empty()) ThrowConfigError("no input path configured");
    LoadResult loaded = LoadInstances(config.io.input);
    WriteRejects(config, loaded);
    EnforceRejectThreshold(loaded, config.reject_fraction);
    return loaded;
  });
}

VerifiedDataset VerifyWithScorers(const PipelineConfig& config,
                                  std::vector<Instance> instances) {
  const ScorerRegistry registry = MakeScorerRegistry(config);
  return VerifyInstances(config, std::move(instances), &registry);
}

}  // namespace

void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn) {
  workers = std::min(ResolveWorkers(workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

ScorerRegistry MakeScorerRegistry(const PipelineConfig& config) {
  ScorerRegistry registry;
  for (const ExternalScorerConfig& s : config.scorers) {
    registry.Register(s.name,
                      std::make_shared<SubprocessScorer>(s.name, s.command));
  }
  return registry;
}

VerifiedDataset VerifyInstances(const PipelineConfig& config,
                                std::vector<Instance> instances,
                                const ScorerRegistry* registry) {
  InPhase("config", [&] { ValidateConfig(config); });
  VerifiedDataset data;
  data.instances = std::move(instances);
  const std::size_t n = data.instances.size();
  data.scores.resize(n);
  data.group_records.resize(n);
  data.grouped.assign(n, false);
  data.skip_reason.resize(n);

  const std::vector<ConstraintSpec> instance_specs =
      config.InstanceConstraints();
  const ConstraintSpec* group_spec = config.GroupConstraint();

  std::optional<ConstraintEvaluator> evaluator;
  if (!instance_specs.empty()) {
    InPhase("config", [&] {
      evaluator.emplace(instance_specs, config.composite, registry);
    });
  }

  InPhase("verify", [&] {
    if (!evaluator) return;
    const std::size_t chunks = (n + config.batch_size - 1) / config.batch_size;
    ParallelFor(chunks, config.workers, [&](std::size_t chunk) {
      const std::size_t begin = chunk * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      std::vector<std::vector<CsrScore>> batch = evaluator->EvaluateBatch(
          std::span<const Instance>(data.instances).subspan(begin,
                                                            end - begin));
      for (std::size_t i = begin; i < end; ++i) {
        data.scores[i] = std::move(batch[i - begin]);
      }
    });
  });

  if (group_spec != nullptr) {
    InPhase("resolve", [&] {
      const std::vector<GroupPlan> groups = CollectGroups(data.instances);
      std::vector<GroupResult> results(groups.size());
      ParallelFor(groups.size(), config.workers, [&](std::size_t g) {
        results[g] = ResolveOneGroup(config, *group_spec, groups[g], data);
      });
      for (const GroupResult& r : results) {
        if (!r.valid) continue;
        ++data.report.groups.groups;
        data.report.groups.combinations_enumerated += r.enumerated;
        data.report.groups.conflict_free += r.conflict_free ? 1 : 0;
        data.report.groups.greedy_groups += r.greedy ? 1 : 0;
      }
    });
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (data.scores[i].empty() && data.skip_reason[i].empty()) {
      data.skip_reason[i] = std::string(kNoInstanceConstraints);
    }
    for (const CsrScore& s : data.scores[i]) AccumulateScore(data.report, s);
  }
  // Keep the declaration order of constraints in the report.
  std::vector<ConstraintStat> ordered;
  for (const ConstraintSpec& spec : config.constraints) {
    for (const ConstraintStat& s : data.report.constraints) {
      if (s.name == spec.name) ordered.push_back(s);
    }
  }
  data.report.constraints = std::move(ordered);
  return data;
}

InstanceOutputs BuildInstanceOutputs(const PipelineConfig& config,
                                     const VerifiedDataset& data,
                                     std::size_t index) {
  InstanceOutputs out;
  const Instance& inst = data.instances[index];
  const std::vector<CsrScore>& scores = data.scores[index];
  if (!scores.empty()) {
    const std::vector<std::size_t> order =
        RankCandidateIndices(inst, scores, config.score_mode);
    RankedRecord ranked;
    ranked.instance_id = inst.instance_id;
    for (std::size_t i : order) {
      ranked.ranking.push_back(inst.candidates[i].candidate_id);
      ranked.csr.push_back(scores[i].value);
      ranked.scores.push_back(SequenceScore(inst.candidates[i],
                                            config.score_mode));
    }
    out.ranked = std::move(ranked);
    if (config.emit_loss) {
      out.loss = ComputeLossReport(inst, scores, config.MakeLossOptions());
    }
  }

  if (!data.skip_reason[index].empty()) {
    out.skip_reason = data.skip_reason[index];
    return out;
  }
  if (data.grouped[index]) {
    out.records = data.group_records[index];
  } else {
    out.records = SelectPairs(inst, scores, config.selection, config.margin);
    if (out.records.empty()) {
      if (inst.candidates.size() < 2) {
        out.skip_reason = std::string(kSingleCandidate);
      } else if (AllTied(scores)) {
        out.skip_reason = std::string(kCsrTie);
      } else {
        out.skip_reason = std::string(kNoQualifyingPair);
      }
    }
  }
  for (const PreferenceRecord& r : out.records) {
    if (r.source == PreferenceSource::kInstanceCsr &&
        r.csr_chosen < r.csr_rejected + config.selection.gap_epsilon -
                           kCsrEpsilon) {
      ThrowInternalError("instance '" + r.instance_id +
                         "' produced a pair below the CSR gap");
    }
  }
  return out;
}

std::string HoldoutKey(const Instance& instance) {
  return instance.group_id ? "g:" + *instance.group_id
                           : "i:" + instance.instance_id;
}

bool IsHoldout(std::string_view key, std::uint64_t seed, double fraction) {
  if (fraction <= 0.0) return false;
  SplitRng rng(seed ^ StableHash(key));
  return rng.Uniform() < fraction;
}

BuildResult BuildPreferences(const PipelineConfig& config,
                             std::vector<Instance> instances,
                             const ScorerRegistry* registry) {
  VerifiedDataset data =
      VerifyInstances(config, std::move(instances), registry);
  BuildResult result;
  result.report = data.report;
  result.report.instances_in = data.instances.size();
  InPhase("select", [&] {
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
      InstanceOutputs out = BuildInstanceOutputs(config, data, i);
      if (out.ranked) result.ranked.push_back(std::move(*out.ranked));
      if (out.loss) result.losses.push_back(std::move(*out.loss));
      if (out.records.empty()) {
        CountSkip(result.report, out.skip_reason);
        continue;
      }
      ++result.report.instances_contributing;
      const bool holdout = IsHoldout(HoldoutKey(data.instances[i]),
                                     config.seed, config.holdout_fraction);
      auto& sink = holdout ? result.validation : result.preferences;
      for (PreferenceRecord& r : out.records) sink.push_back(std::move(r));
    }
  });
  result.report.pairs_emitted = result.preferences.size();
  result.report.validation_pairs = result.validation.size();
  result.report.ranked_emitted = result.ranked.size();
  result.report.losses_emitted = result.losses.size();
  return result;
}

RunReport RunPipeline(const PipelineConfig& config) {
  InPhase("config", [&] {
    ValidateConfig(config);
    if (config.io.preferences.empty()) {
      ThrowConfigError("no preference output path configured");
    }
    if (config.emit_loss && config.io.losses.empty()) {
      ThrowConfigError("emit_loss needs a loss output path");
    }
  });
  LoadResult loaded = LoadInput(config);
  VerifiedDataset data =
      VerifyWithScorers(config, std::move(loaded.instances));

  RunReport report = data.report;
  report.instances_in = loaded.lines_read;
  report.lines_rejected = loaded.rejected.size();

  InPhase("emit", [&] {
    std::filesystem::path validation_path = config.io.validation;
    if (config.holdout_fraction > 0.0 && validation_path.empty()) {
      validation_path = config.io.preferences;
      validation_path += ".validation";
    }
    LineWriter prefs(config.io.preferences);
    std::optional<LineWriter> validation;
    std::optional<LineWriter> ranked;
    std::optional<LineWriter> losses;
    if (config.holdout_fraction > 0.0) validation.emplace(validation_path);
    if (!config.io.ranked.empty()) ranked.emplace(config.io.ranked);
    if (config.emit_loss) losses.emplace(config.io.losses);

    struct Chunk {
      std::string prefs, validation, ranked, losses;
      std::size_t n_prefs = 0, n_validation = 0, n_ranked = 0, n_losses = 0;
      std::size_t contributing = 0;
      std::map<std::string, std::size_t> skips;
    };
    auto flush = [&](const Chunk& c) {
      prefs.WriteBlock(c.prefs, c.n_prefs);
      if (validation) validation->WriteBlock(c.validation, c.n_validation);
      if (ranked) ranked->WriteBlock(c.ranked, c.n_ranked);
      if (losses) losses->WriteBlock(c.losses, c.n_losses);
      report.instances_contributing += c.contributing;
      for (const auto& [reason, count] : c.skips) {
        report.instances_skipped += count;
        report.skip_reasons[reason] += count;
      }
    };

    const std::size_t n = data.instances.size();
    const std::size_t chunks = (n + config.batch_size - 1) / config.batch_size;
    std::vector<Chunk> pending(config.deterministic_order ? chunks : 0);
    std::mutex write_mu;
    ParallelFor(chunks, config.workers, [&](std::size_t chunk_index) {
      Chunk chunk;
      const std::size_t begin = chunk_index * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      for (std::size_t i = begin; i < end; ++i) {
        InstanceOutputs out = BuildInstanceOutputs(config, data, i);
        if (out.ranked && ranked) {
          chunk.ranked += SerializeRankedRecord(*out.ranked);
          chunk.ranked.push_back('\n');
          ++chunk.n_ranked;
        }
        if (out.loss && losses) {
          chunk.losses += SerializeLossReport(*out.loss);
          chunk.losses.push_back('\n');
          ++chunk.n_losses;
        }
        if (out.records.empty()) {
          ++chunk.skips[out.skip_reason];
          continue;
        }
        ++chunk.contributing;
        const bool holdout = IsHoldout(HoldoutKey(data.instances[i]),
                                       config.seed, config.holdout_fraction);
        std::string& sink = holdout ? chunk.validation : chunk.prefs;
        std::size_t& count = holdout ? chunk.n_validation : chunk.n_prefs;
        for (const PreferenceRecord& r : out.records) {
          sink += SerializePreferenceRecord(r);
          sink.push_back('\n');
          ++count;
        }
      }
      if (config.deterministic_order) {
        pending[chunk_index] = std::move(chunk);
      } else {
        std::lock_guard<std::mutex> lock(write_mu);
        flush(chunk);
      }
    });
    for (const Chunk& c : pending) flush(c);

    prefs.Close();
    report.pairs_emitted = prefs.lines();
    if (validation) {
      validation->Close();
      report.validation_pairs = validation->lines();
    }
    if (ranked) {
      ranked->Close();
      report.ranked_emitted = ranked->lines();
    }
    if (losses) {
      losses->Close();
      report.losses_emitted = losses->lines();
    }
    if (!config.io.scored.empty()) {
      LineWriter scored(config.io.scored);
      for (std::size_t i = 0; i < n; ++i) {
        if (data.scores[i].empty()) continue;
        scored.Write(SerializeScoredInstance({data.instances[i],
                                              data.scores[i]}));
      }
      scored.Close();
    }
    if (report.instances_in != report.instances_contributing +
                                  report.instances_skipped +
                                  report.lines_rejected) {
      ThrowInternalError("instance accounting does not balance");
    }
    if (!config.io.report.empty()) EmitReport(report, config.io.report);
  });
  return report;
}

RunReport RunVerify(const PipelineConfig& config) {
  InPhase("config", [&] {
    ValidateConfig(config);
    if (config.io.scored.empty()) {
      ThrowConfigError("no scored output path configured");
    }
  });
  LoadResult loaded = LoadInput(config);
  VerifiedDataset data =
      VerifyWithScorers(config, std::move(loaded.instances));
  RunReport report = data.report;
  report.instances_in = loaded.lines_read;
  report.lines_rejected = loaded.rejected.size();
  InPhase("emit", [&] {
    LineWriter scored(config.io.scored);
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
      if (data.scores[i].empty()) {
        CountSkip(report, data.skip_reason[i]);
        continue;
      }
      scored.Write(
          SerializeScoredInstance({data.instances[i], data.scores[i]}));
    }
    scored.Close();
    if (!config.io.report.empty()) EmitReport(report, config.io.report);
  });
  return report;
}

RunReport RunLosses(const PipelineConfig& config,
                    const std::filesystem::path& scored,
                    const std::filesystem::path& output) {
  RunReport report;
  InPhase("losses", [&] {
    const LossOptions options = config.MakeLossOptions();
    LineWriter out(output);
    ForEachLine(scored, [&](std::size_t number, const std::string& line) {
      ++report.instances_in;
      ScoredInstance s;
      try {
        s = ParseScoredInstance(line);
      } catch (const Error& e) {
        ThrowInputError("line " + std::to_string(number) + ": " + e.what());
      }
      for (const CsrScore& score : s.scores) AccumulateScore(report, score);
      out.Write(SerializeLossReport(
          ComputeLossReport(s.instance, s.scores, options)));
    });
    out.Close();
    report.losses_emitted = out.lines();
  });
  return report;
}

RunReport SummarizeScoredFile(const std::filesystem::path& scored) {
  RunReport report;
  InPhase("report", [&] {
    ForEachLine(scored, [&](std::size_t number, const std::string& line) {
      ++report.instances_in;
      ScoredInstance s;
      try {
        s = ParseScoredInstance(line);
      } catch (const Error& e) {
        ThrowInputError("line " + std::to_string(number) + ": " + e.what());
      }
      for (const CsrScore& score : s.scores) AccumulateScore(report, score);
    });
  });
  return report;
}

}  // namespace prefsynth

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

#include "prefsynth/config.h"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "prefsynth/error.h"

namespace prefsynth {
namespace {

void CheckKeys(const YAML::Node& node, std::initializer_list<const char*> keys,
               const std::string& where) {
  if (!node.IsMap()) ThrowConfigError(where + " must be a mapping");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (allowed.count(key) == 0) {
      ThrowConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T Get(const YAML::Node& node, const char* key, const std::string& where,
      T fallback) {
  const YAML::Node value = node[key];
  if (!value || value.IsNull()) return fallback;
  try {
    return value.as<T>();
  } catch (const YAML::Exception&) {
    ThrowConfigError(where + "." + key + " has the wrong type");
  }
}

std::vector<std::string> GetStrings(const YAML::Node& node, const char* key,
                                    const std::string& where) {
  const YAML::Node value = node[key];
  if (!value || value.IsNull()) return {};
  if (!value.IsSequence()) {
    ThrowConfigError(where + "." + key + " must be a list of strings");
  }
  std::vector<std::string> out;
  for (const YAML::Node& item : value) {
    if (!item.IsScalar()) {
      ThrowConfigError(where + "." + key + " must be a list of strings");
    }
    out.push_back(item.as<std::string>());
  }
  return out;
}

ScoreMode ParseScoreMode(const std::string& s) {
  if (s == "normalized") return ScoreMode::kLengthNormalized;
  if (s == "raw_sum") return ScoreMode::kRawSum;
  ThrowConfigError("score_mode must be normalized or raw_sum, got '" + s + "'");
}

ConstraintSpec ParseConstraint(const YAML::Node& node, std::size_t index) {
  std::string where = "constraints[" + std::to_string(index) + "]";
  CheckKeys(node,
            {"name", "kind", "weight", "arity", "delimiter", "case_sensitive",
             "match", "options", "fine2coarse", "scorer", "external",
             "stopwords", "disjointness", "candidates_per_member",
             "enumeration_cap", "fallback", "greedy_sweeps"},
            where);
  ConstraintSpec spec;
  spec.name = Get<std::string>(node, "name", where, "");
  if (spec.name.empty()) ThrowConfigError(where + ".name is required");
  where = "constraint '" + spec.name + "'";

  const std::string kind = Get<std::string>(node, "kind", where, "");
  const auto parsed_kind = ParseConstraintKind(kind);
  if (!parsed_kind) {
    ThrowConfigError(where + ": unknown kind '" + kind + "'");
  }
  spec.kind = *parsed_kind;
  spec.weight = Get<double>(node, "weight", where, 1.0);
  if (node["arity"]) {
    const std::string arity = Get<std::string>(node, "arity", where, "");
    const auto parsed = ParseArity(arity);
    if (!parsed) ThrowConfigError(where + ": unknown arity '" + arity + "'");
    spec.declared_arity = parsed;
  }

  spec.match.delimiter = Get<std::string>(node, "delimiter", where, ", ");
  spec.match.case_sensitive = Get<bool>(node, "case_sensitive", where, false);
  const std::string match = Get<std::string>(node, "match", where,
                                             "normalized");
  if (match == "normalized") {
    spec.match.mode = MatchMode::kNormalized;
  } else if (match == "literal") {
    spec.match.mode = MatchMode::kLiteral;
  } else {
    ThrowConfigError(where + ": match must be normalized or literal");
  }

  spec.options = GetStrings(node, "options", where);
  if (const YAML::Node f2c = node["fine2coarse"]; f2c && !f2c.IsNull()) {
    if (!f2c.IsMap()) ThrowConfigError(where + ".fine2coarse must be a map");
    for (const auto& kv : f2c) {
      spec.fine2coarse[kv.first.as<std::string>()] =
          kv.second.as<std::string>();
    }
  }

  const std::string scorer = Get<std::string>(node, "scorer", where,
                                              "lexical_recall");
  if (scorer == "lexical_recall") {
    spec.relevance.scorer = RelevanceScorerKind::kLexicalRecall;
  } else if (scorer == "external") {
    spec.relevance.scorer = RelevanceScorerKind::kExternal;
  } else {
    ThrowConfigError(where + ": scorer must be lexical_recall or external");
  }
  spec.relevance.external = Get<std::string>(node, "external", where, "");
  for (const std::string& w : GetStrings(node, "stopwords", where)) {
    spec.relevance.stopwords.insert(w);
  }

  if (const YAML::Node d = node["disjointness"]; d && !d.IsNull()) {
    if (!d.IsSequence()) {
      ThrowConfigError(where + ".disjointness must be a list of role pairs");
    }
    spec.temporal.disjointness.clear();
    for (const YAML::Node& pair : d) {
      if (!pair.IsSequence() || pair.size() != 2) {
        ThrowConfigError(where + ".disjointness entries must be [role, role]");
      }
      spec.temporal.disjointness.emplace_back(
          temporal::ParseRole(pair[0].as<std::string>()),
          temporal::ParseRole(pair[1].as<std::string>()));
    }
  }
  spec.temporal.candidates_per_member = Get<std::size_t>(
      node, "candidates_per_member", where, spec.temporal.candidates_per_member);
  spec.temporal.enumeration_cap = Get<std::size_t>(
      node, "enumeration_cap", where, spec.temporal.enumeration_cap);
  spec.temporal.greedy_sweeps =
      Get<int>(node, "greedy_sweeps", where, spec.temporal.greedy_sweeps);
  const std::string fallback = Get<std::string>(node, "fallback", where,
                                                "error");
  if (fallback == "error") {
    spec.temporal.fallback = temporal::Fallback::kError;
  } else if (fallback == "greedy") {
    spec.temporal.fallback = temporal::Fallback::kGreedy;
  } else {
    ThrowConfigError(where + ": fallback must be error or greedy");
  }
  ValidateConstraintSpec(spec);
  return spec;
}

PipelineConfig ParseRoot(const YAML::Node& root) {
  if (!root || root.IsNull()) ThrowConfigError("configuration is empty");
  CheckKeys(root,
            {"version", "composite", "constraints", "scorers", "selection",
             "margin", "scoring", "loss", "io", "emit", "seed",
             "deterministic_order", "workers", "batch_size", "sampler"},
            "configuration");
  PipelineConfig config;
  if (!root["version"]) ThrowConfigError("configuration needs a version");
  config.version = Get<int>(root, "version", "configuration", 0);
  if (config.version != kConfigVersion) {
    ThrowConfigError("unsupported configuration version " +
                     std::to_string(config.version));
  }

  if (const YAML::Node c = root["composite"]) {
    CheckKeys(c, {"combinator"}, "composite");
    const std::string comb =
        Get<std::string>(c, "combinator", "composite", "weighted_mean");
    if (comb == "weighted_mean") {
      config.composite.combinator = Combinator::kWeightedMean;
    } else if (comb == "min") {
      config.composite.combinator = Combinator::kMin;
    } else {
      ThrowConfigError("composite.combinator must be weighted_mean or min");
    }
  }

  const YAML::Node constraints = root["constraints"];
  if (!constraints || !constraints.IsSequence() || constraints.size() == 0) {
    ThrowConfigError("constraints must be a non-empty list");
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    config.constraints.push_back(ParseConstraint(constraints[i], i));
  }

  if (const YAML::Node s = root["scorers"]; s && !s.IsNull()) {
    if (!s.IsMap()) ThrowConfigError("scorers must map names to commands");
    for (const auto& kv : s) {
      const std::string name = kv.first.as<std::string>();
      const std::string where = "scorers." + name;
      CheckKeys(kv.second, {"command"}, where);
      config.scorers.push_back({name, GetStrings(kv.second, "command", where)});
    }
  }

  if (const YAML::Node s = root["selection"]) {
    CheckKeys(s, {"gap_epsilon", "min_logprob_quantile", "binary_mode",
                  "max_pairs_per_instance"},
              "selection");
    SelectionPolicy& p = config.selection;
    p.gap_epsilon = Get<double>(s, "gap_epsilon", "selection", p.gap_epsilon);
    p.min_logprob_quantile = Get<double>(s, "min_logprob_quantile",
                                         "selection", p.min_logprob_quantile);
    p.binary_mode = Get<bool>(s, "binary_mode", "selection", p.binary_mode);
    p.max_pairs_per_instance = Get<std::size_t>(
        s, "max_pairs_per_instance", "selection", p.max_pairs_per_instance);
  }

  if (const YAML::Node m = root["margin"]) {
    CheckKeys(m, {"mode", "constant", "scale"}, "margin");
    const std::string mode = Get<std::string>(m, "mode", "margin", "csr_gap");
    if (mode == "csr_gap") {
      config.margin.mode = MarginMode::kCsrGap;
    } else if (mode == "constant") {
      config.margin.mode = MarginMode::kConstant;
    } else {
      ThrowConfigError("margin.mode must be csr_gap or constant");
    }
    config.margin.constant = Get<double>(m, "constant", "margin", 0.0);
    config.margin.scale = Get<double>(m, "scale", "margin", 1.0);
  }

  if (const YAML::Node s = root["scoring"]) {
    CheckKeys(s, {"score_mode"}, "scoring");
    config.score_mode =
        ParseScoreMode(Get<std::string>(s, "score_mode", "scoring",
                                        "normalized"));
  }
  config.selection.score_mode = config.score_mode;

  if (const YAML::Node l = root["loss"]) {
    CheckKeys(l, {"reweighted", "ft_top_k"}, "loss");
    config.loss_reweighted = Get<bool>(l, "reweighted", "loss", true);
    config.loss_ft_top_k = Get<std::size_t>(l, "ft_top_k", "loss", 1);
  }

  if (const YAML::Node io = root["io"]) {
    CheckKeys(io, {"input", "preferences", "ranked", "scored", "losses",
                   "report", "rejects", "validation", "reject_fraction",
                   "holdout_fraction"},
              "io");
    IoPaths& p = config.io;
    p.input = Get<std::string>(io, "input", "io", "");
    p.preferences = Get<std::string>(io, "preferences", "io", "");
    p.ranked = Get<std::string>(io, "ranked", "io", "");
    p.scored = Get<std::string>(io, "scored", "io", "");
    p.losses = Get<std::string>(io, "losses", "io", "");
    p.report = Get<std::string>(io, "report", "io", "");
    p.rejects = Get<std::string>(io, "rejects", "io", "");
    p.validation = Get<std::string>(io, "validation", "io", "");
    config.reject_fraction =
        Get<double>(io, "reject_fraction", "io", config.reject_fraction);
    config.holdout_fraction =
        Get<double>(io, "holdout_fraction", "io", config.holdout_fraction);
  }

  if (const YAML::Node e = root["emit"]) {
    CheckKeys(e, {"loss"}, "emit");
    config.emit_loss = Get<bool>(e, "loss", "emit", false);
  }
  config.seed = Get<std::uint64_t>(root, "seed", "configuration", 0);
  config.deterministic_order =
      Get<bool>(root, "deterministic_order", "configuration", false);
  config.workers = Get<std::size_t>(root, "workers", "configuration", 0);
  config.batch_size =
      Get<std::size_t>(root, "batch_size", "configuration", config.batch_size);

  if (const YAML::Node s = root["sampler"]) {
    CheckKeys(s, {"satisfying", "violating", "violation_rate",
                  "min_token_logprob", "max_token_logprob"},
              "sampler");
    MockSamplerConfig& m = config.sampler;
    m.satisfying = GetStrings(s, "satisfying", "sampler");
    m.violating = GetStrings(s, "violating", "sampler");
    m.violation_rate =
        Get<double>(s, "violation_rate", "sampler", m.violation_rate);
    m.min_token_logprob =
        Get<double>(s, "min_token_logprob", "sampler", m.min_token_logprob);
    m.max_token_logprob =
        Get<double>(s, "max_token_logprob", "sampler", m.max_token_logprob);
    ValidateMockSamplerConfig(m);
  }

  ValidateConfig(config);
  return config;
}

}  // namespace

const ConstraintSpec* PipelineConfig::GroupConstraint() const {
  for (const ConstraintSpec& spec : constraints) {
    if (spec.arity() == Arity::kGroup) return &spec;
  }
  return nullptr;
}

std::vector<ConstraintSpec> PipelineConfig::InstanceConstraints() const {
  std::vector<ConstraintSpec> out;
  for (const ConstraintSpec& spec : constraints) {
    if (spec.arity() != Arity::kGroup) out.push_back(spec);
  }
  return out;
}

LossOptions PipelineConfig::MakeLossOptions() const {
  LossOptions options;
  options.reweighted = loss_reweighted;
  options.margin = margin;
  options.score_mode = score_mode;
  options.ft_top_k = loss_ft_top_k;
  return options;
}

void ValidateConfig(const PipelineConfig& config) {
  if (config.constraints.empty()) {
    ThrowConfigError("at least one constraint is required");
  }
  std::set<std::string> names;
  std::size_t group_constraints = 0;
  double instance_weight = 0.0;
  std::size_t instance_constraints = 0;
  for (const ConstraintSpec& spec : config.constraints) {
    ValidateConstraintSpec(spec);
    if (!names.insert(spec.name).second) {
      ThrowConfigError("duplicate constraint name '" + spec.name + "'");
    }
    if (spec.arity() == Arity::kGroup) {
      ++group_constraints;
    } else {
      ++instance_constraints;
      instance_weight += spec.weight;
    }
    if (spec.kind == ConstraintKind::kRelevance &&
        spec.relevance.scorer == RelevanceScorerKind::kExternal) {
      bool found = false;
      for (const ExternalScorerConfig& s : config.scorers) {
        found = found || s.name == spec.relevance.external;
      }
      if (!found) {
        ThrowConfigError("constraint '" + spec.name +
                         "' refers to undeclared scorer '" +
                         spec.relevance.external + "'");
      }
    }
  }
  if (group_constraints > 1) {
    ThrowConfigError("at most one temporal_consistency constraint is allowed");
  }
  if (instance_constraints > 0 &&
      config.composite.combinator == Combinator::kWeightedMean &&
      instance_weight <= 0.0) {
    ThrowConfigError("weighted_mean requires at least one positive weight");
  }
  for (const ExternalScorerConfig& s : config.scorers) {
    if (s.command.empty()) {
      ThrowConfigError("scorer '" + s.name + "' needs a non-empty command");
    }
  }
  ValidateSelectionPolicy(config.selection);
  if (config.margin.mode == MarginMode::kConstant &&
      !(config.margin.constant >= 0.0)) {
    ThrowConfigError("margin.constant must be >= 0");
  }
  if (!(config.margin.scale >= 0.0)) {
    ThrowConfigError("margin.scale must be >= 0");
  }
  if (config.loss_ft_top_k < 1) ThrowConfigError("loss.ft_top_k must be >= 1");
  if (!(config.reject_fraction >= 0.0 && config.reject_fraction <= 1.0)) {
    ThrowConfigError("io.reject_fraction must be in [0, 1]");
  }
  if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
    ThrowConfigError("io.holdout_fraction must be in [0, 1)");
  }
  if (config.batch_size < 1) ThrowConfigError("batch_size must be >= 1");
}

PipelineConfig ParseConfig(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    ThrowConfigError(std::string("invalid YAML: ") + e.what());
  }
  try {
    return ParseRoot(root);
  } catch (const YAML::Exception& e) {
    ThrowConfigError(std::string("invalid configuration: ") + e.what());
  }
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ThrowConfigError("cannot read configuration '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

}  // namespace prefsynth

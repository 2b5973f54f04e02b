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

#include "prefsynth/records.h"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "nlohmann/json.hpp"
#include "prefsynth/error.h"

namespace prefsynth {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string Dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

json ParseObject(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    ThrowInputError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) ThrowInputError("record must be a JSON object");
  return j;
}

const json& Require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    ThrowInputError(std::string("missing required field '") + key + "'");
  }
  return *it;
}

std::string RequireString(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_string()) {
    ThrowInputError(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

double RequireNumber(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_number()) {
    ThrowInputError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t RequireInteger(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    ThrowInputError(std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::optional<std::string> OptionalString(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    ThrowInputError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

const json& RequireArray(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_array()) {
    ThrowInputError(std::string("field '") + key + "' must be an array");
  }
  return v;
}

CandidateResponse ParseCandidate(const json& j) {
  if (!j.is_object()) ThrowInputError("candidate must be a JSON object");
  CandidateResponse c;
  c.candidate_id = RequireString(j, "candidate_id");
  c.text = RequireString(j, "text");
  c.sum_logprob = RequireNumber(j, "sum_logprob");
  c.token_count = RequireInteger(j, "token_count");
  ValidateCandidate(c);
  return c;
}

ordered_json CandidateJson(const CandidateResponse& c) {
  ordered_json j;
  j["candidate_id"] = c.candidate_id;
  j["text"] = c.text;
  j["sum_logprob"] = c.sum_logprob;
  j["token_count"] = c.token_count;
  return j;
}

ordered_json InstanceHeader(const Instance& instance) {
  ordered_json j;
  j["instance_id"] = instance.instance_id;
  if (instance.group_id) j["group_id"] = *instance.group_id;
  if (instance.role) j["role"] = *instance.role;
  j["prompt"] = instance.prompt;
  return j;
}

Instance ParseInstanceJson(const json& j) {
  Instance inst;
  inst.instance_id = RequireString(j, "instance_id");
  inst.group_id = OptionalString(j, "group_id");
  inst.role = OptionalString(j, "role");
  inst.prompt = RequireString(j, "prompt");
  for (const json& c : RequireArray(j, "candidates")) {
    inst.candidates.push_back(ParseCandidate(c));
  }
  ValidateInstance(inst);
  return inst;
}

CandidateResponse ParseCandidateRef(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_object()) {
    ThrowInputError(std::string("field '") + key + "' must be an object");
  }
  CandidateResponse c;
  c.candidate_id = RequireString(v, "candidate_id");
  c.text = RequireString(v, "text");
  return c;
}

ordered_json CandidateRef(const CandidateResponse& c) {
  ordered_json j;
  j["candidate_id"] = c.candidate_id;
  j["text"] = c.text;
  return j;
}

std::vector<double> NumberArray(const json& j, const char* key) {
  std::vector<double> out;
  for (const json& v : RequireArray(j, key)) {
    if (!v.is_number()) {
      ThrowInputError(std::string("field '") + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Instance ParseInstance(const std::string& line) {
  return ParseInstanceJson(ParseObject(line));
}

std::string SerializeInstance(const Instance& instance) {
  ordered_json j = InstanceHeader(instance);
  j["candidates"] = ordered_json::array();
  for (const CandidateResponse& c : instance.candidates) {
    j["candidates"].push_back(CandidateJson(c));
  }
  return Dump(j);
}

PreferenceRecord ParsePreferenceRecord(const std::string& line) {
  const json j = ParseObject(line);
  PreferenceRecord r;
  r.instance_id = RequireString(j, "instance_id");
  r.prompt = RequireString(j, "prompt");
  r.chosen = ParseCandidateRef(j, "chosen");
  r.rejected = ParseCandidateRef(j, "rejected");
  r.csr_chosen = RequireNumber(j, "csr_chosen");
  r.csr_rejected = RequireNumber(j, "csr_rejected");
  r.margin = RequireNumber(j, "margin");
  const std::string source = RequireString(j, "source");
  if (source == "instance_csr") {
    r.source = PreferenceSource::kInstanceCsr;
  } else if (source == "group_combination") {
    r.source = PreferenceSource::kGroupCombination;
  } else {
    ThrowInputError("unknown preference source '" + source + "'");
  }
  return r;
}

std::string SerializePreferenceRecord(const PreferenceRecord& record) {
  ordered_json j;
  j["instance_id"] = record.instance_id;
  j["prompt"] = record.prompt;
  j["chosen"] = CandidateRef(record.chosen);
  j["rejected"] = CandidateRef(record.rejected);
  j["csr_chosen"] = record.csr_chosen;
  j["csr_rejected"] = record.csr_rejected;
  j["margin"] = record.margin;
  j["source"] = std::string(PreferenceSourceName(record.source));
  return Dump(j);
}

RankedRecord ParseRankedRecord(const std::string& line) {
  const json j = ParseObject(line);
  RankedRecord r;
  r.instance_id = RequireString(j, "instance_id");
  for (const json& v : RequireArray(j, "ranking")) {
    if (!v.is_string()) ThrowInputError("ranking must hold candidate ids");
    r.ranking.push_back(v.get<std::string>());
  }
  r.csr = NumberArray(j, "csr");
  r.scores = NumberArray(j, "scores");
  if (r.csr.size() != r.ranking.size() || r.scores.size() != r.ranking.size()) {
    ThrowInputError("ranking, csr and scores must have equal lengths");
  }
  return r;
}

std::string SerializeRankedRecord(const RankedRecord& record) {
  ordered_json j;
  j["instance_id"] = record.instance_id;
  j["ranking"] = record.ranking;
  j["csr"] = record.csr;
  j["scores"] = record.scores;
  return Dump(j);
}

ScoredInstance ParseScoredInstance(const std::string& line) {
  const json j = ParseObject(line);
  ScoredInstance scored;
  scored.instance = ParseInstanceJson(j);
  for (const json& c : RequireArray(j, "candidates")) {
    CsrScore score;
    score.value = RequireNumber(c, "csr");
    if (!(score.value >= 0.0 && score.value <= 1.0)) {
      ThrowInputError("csr must lie in [0, 1]");
    }
    auto parts = c.find("parts");
    if (parts != c.end() && parts->is_array()) {
      for (const json& p : *parts) {
        score.parts.push_back({RequireString(p, "name"),
                               RequireNumber(p, "value"),
                               RequireNumber(p, "weight")});
      }
    }
    scored.scores.push_back(std::move(score));
  }
  return scored;
}

std::string SerializeScoredInstance(const ScoredInstance& scored) {
  const Instance& instance = scored.instance;
  if (scored.scores.size() != instance.candidates.size()) {
    ThrowInternalError("scored instance '" + instance.instance_id +
                       "' is missing candidate scores");
  }
  ordered_json j = InstanceHeader(instance);
  j["candidates"] = ordered_json::array();
  for (std::size_t i = 0; i < instance.candidates.size(); ++i) {
    ordered_json c = CandidateJson(instance.candidates[i]);
    c["csr"] = scored.scores[i].value;
    ordered_json parts = ordered_json::array();
    for (const CsrPart& p : scored.scores[i].parts) {
      ordered_json part;
      part["name"] = p.constraint_name;
      part["value"] = p.value;
      part["weight"] = p.weight;
      parts.push_back(std::move(part));
    }
    c["parts"] = std::move(parts);
    j["candidates"].push_back(std::move(c));
  }
  return Dump(j);
}

LossReport ParseLossReport(const std::string& line) {
  const json j = ParseObject(line);
  LossReport r;
  r.instance_id = RequireString(j, "instance_id");
  r.l_ft = RequireNumber(j, "l_ft");
  r.l_rank = RequireNumber(j, "l_rank");
  r.total = RequireNumber(j, "total");
  const json& reweighted = Require(j, "reweighted");
  if (!reweighted.is_boolean()) ThrowInputError("reweighted must be boolean");
  r.reweighted = reweighted.get<bool>();
  const std::string mode = RequireString(j, "margin_mode");
  if (mode == "csr_gap") {
    r.margin_mode = MarginMode::kCsrGap;
  } else if (mode == "constant") {
    r.margin_mode = MarginMode::kConstant;
  } else {
    ThrowInputError("unknown margin_mode '" + mode + "'");
  }
  for (const json& t : RequireArray(j, "per_pair_terms")) {
    PairTerm term;
    term.lower = static_cast<std::size_t>(RequireInteger(t, "i"));
    term.higher = static_cast<std::size_t>(RequireInteger(t, "j"));
    term.hinge = RequireNumber(t, "hinge");
    r.per_pair_terms.push_back(term);
  }
  return r;
}

std::string SerializeLossReport(const LossReport& report) {
  ordered_json j;
  j["instance_id"] = report.instance_id;
  j["l_ft"] = report.l_ft;
  j["l_rank"] = report.l_rank;
  j["total"] = report.total;
  j["reweighted"] = report.reweighted;
  j["margin_mode"] = std::string(MarginModeName(report.margin_mode));
  ordered_json terms = ordered_json::array();
  for (const PairTerm& t : report.per_pair_terms) {
    ordered_json term;
    term["i"] = t.lower;
    term["j"] = t.higher;
    term["hinge"] = t.hinge;
    terms.push_back(std::move(term));
  }
  j["per_pair_terms"] = std::move(terms);
  return Dump(j);
}

std::string SerializeRejectedLine(const RejectedLine& rejected) {
  ordered_json j;
  j["line"] = rejected.line_number;
  j["error"] = rejected.error;
  return Dump(j);
}

void ForEachLine(
    std::istream& in,
    const std::function<void(std::size_t, const std::string&)>& visit) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    visit(number, line);
  }
}

void ForEachLine(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const std::string&)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  ForEachLine(in, visit);
}

LoadResult LoadInstances(std::istream& in) {
  LoadResult result;
  std::unordered_set<std::string> ids;
  ForEachLine(in, [&](std::size_t number, const std::string& line) {
    ++result.lines_read;
    try {
      Instance inst = ParseInstance(line);
      if (!ids.insert(inst.instance_id).second) {
        ThrowInputError("duplicate instance_id '" + inst.instance_id + "'");
      }
      result.instances.push_back(std::move(inst));
    } catch (const Error& e) {
      result.rejected.push_back({number, e.what()});
    } catch (const json::exception& e) {
      result.rejected.push_back({number, e.what()});
    }
  });
  return result;
}

LoadResult LoadInstances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  return LoadInstances(in);
}

void EnforceRejectThreshold(const LoadResult& result, double max_fraction) {
  if (result.lines_read == 0 || result.rejected.empty()) return;
  const double fraction = static_cast<double>(result.rejected.size()) /
                          static_cast<double>(result.lines_read);
  if (fraction > max_fraction) {
    throw Error(ErrorCode::kData,
                std::to_string(result.rejected.size()) + " of " +
                    std::to_string(result.lines_read) +
                    " input lines rejected, above the allowed fraction " +
                    std::to_string(max_fraction));
  }
}

LineWriter::LineWriter(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) {
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() +
                                    "': " + std::strerror(errno));
  }
}

LineWriter::~LineWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void LineWriter::Write(const std::string& line) {
  std::fwrite(line.data(), 1, line.size(), file_);
  std::fputc('\n', file_);
  ++lines_;
}

void LineWriter::WriteBlock(const std::string& block, std::size_t line_count) {
  std::fwrite(block.data(), 1, block.size(), file_);
  lines_ += line_count;
}

void LineWriter::Close() {
  if (file_ == nullptr) return;
  const bool failed = std::ferror(file_) != 0;
  const int rc = std::fclose(file_);
  file_ = nullptr;
  if (failed || rc != 0) {
    throw Error(ErrorCode::kIo, "failed writing '" + path_.string() + "'");
  }
}

}  // namespace prefsynth

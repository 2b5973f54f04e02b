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

#include "prefsynth/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlohmann/json.hpp"
#include "prefsynth/error.h"

namespace prefsynth {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ConstraintStat& StatFor(RunReport& report, const std::string& name) {
  for (ConstraintStat& s : report.constraints) {
    if (s.name == name) return s;
  }
  report.constraints.push_back({name, 0, 0.0});
  return report.constraints.back();
}

void WriteFile(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
  out << data;
  out.close();
  if (!out) {
    throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
  }
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::size_t GetCount(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    ThrowInputError(std::string("report field '") + key +
                    "' must be a nonnegative integer");
  }
  return it->get<std::size_t>();
}

}  // namespace

std::size_t HistogramBin(double csr) {
  const double clamped = std::clamp(csr, 0.0, 1.0);
  const auto bin = static_cast<std::size_t>(
      std::floor(clamped * static_cast<double>(kHistogramBins)));
  return std::min(bin, kHistogramBins - 1);
}

void AccumulateScore(RunReport& report, const CsrScore& score) {
  ++report.candidates_scored;
  ++report.histogram[HistogramBin(score.value)];
  for (const CsrPart& part : score.parts) {
    ConstraintStat& stat = StatFor(report, part.constraint_name);
    ++stat.count;
    stat.sum += part.value;
  }
}

void MergeReport(RunReport& into, const RunReport& from) {
  into.candidates_scored += from.candidates_scored;
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    into.histogram[i] += from.histogram[i];
  }
  for (const ConstraintStat& s : from.constraints) {
    ConstraintStat& stat = StatFor(into, s.name);
    stat.count += s.count;
    stat.sum += s.sum;
  }
}

RunReport SummarizeScores(std::span<const ScoredInstance> scored) {
  RunReport report;
  report.instances_in = scored.size();
  for (const ScoredInstance& s : scored) {
    for (const CsrScore& score : s.scores) AccumulateScore(report, score);
  }
  return report;
}

std::string ReportToJson(const RunReport& report) {
  ordered_json j;
  j["instances_in"] = report.instances_in;
  j["lines_rejected"] = report.lines_rejected;
  j["instances_skipped"] = report.instances_skipped;
  j["instances_contributing"] = report.instances_contributing;
  j["candidates_scored"] = report.candidates_scored;
  j["pairs_emitted"] = report.pairs_emitted;
  j["validation_pairs"] = report.validation_pairs;
  j["ranked_emitted"] = report.ranked_emitted;
  j["losses_emitted"] = report.losses_emitted;
  ordered_json constraints = ordered_json::array();
  for (const ConstraintStat& s : report.constraints) {
    ordered_json c;
    c["name"] = s.name;
    c["count"] = s.count;
    c["mean_csr"] = s.mean();
    c["sum_csr"] = s.sum;
    constraints.push_back(std::move(c));
  }
  j["constraints"] = std::move(constraints);
  j["csr_histogram"] = report.histogram;
  ordered_json groups;
  groups["groups"] = report.groups.groups;
  groups["combinations_enumerated"] = report.groups.combinations_enumerated;
  groups["conflict_free"] = report.groups.conflict_free;
  groups["conflict_free_fraction"] = report.groups.conflict_free_fraction();
  groups["greedy_groups"] = report.groups.greedy_groups;
  j["groups"] = std::move(groups);
  ordered_json reasons = ordered_json::object();
  for (const auto& [reason, count] : report.skip_reasons) {
    reasons[reason] = count;
  }
  j["skip_reasons"] = std::move(reasons);
  return j.dump(2) + "\n";
}

namespace {

RunReport ReportFromJsonUnchecked(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    ThrowInputError(std::string("invalid report JSON: ") + e.what());
  }
  if (!j.is_object()) ThrowInputError("report must be a JSON object");
  RunReport r;
  r.instances_in = GetCount(j, "instances_in");
  r.lines_rejected = GetCount(j, "lines_rejected");
  r.instances_skipped = GetCount(j, "instances_skipped");
  r.instances_contributing = GetCount(j, "instances_contributing");
  r.candidates_scored = GetCount(j, "candidates_scored");
  r.pairs_emitted = GetCount(j, "pairs_emitted");
  r.validation_pairs = GetCount(j, "validation_pairs");
  r.ranked_emitted = GetCount(j, "ranked_emitted");
  r.losses_emitted = GetCount(j, "losses_emitted");
  for (const json& c : j.at("constraints")) {
    ConstraintStat s;
    s.name = c.at("name").get<std::string>();
    s.count = GetCount(c, "count");
    s.sum = c.at("sum_csr").get<double>();
    r.constraints.push_back(std::move(s));
  }
  const json& hist = j.at("csr_histogram");
  if (!hist.is_array() || hist.size() != kHistogramBins) {
    ThrowInputError("csr_histogram must have 10 bins");
  }
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    r.histogram[i] = hist[i].get<std::size_t>();
  }
  const json& g = j.at("groups");
  r.groups.groups = GetCount(g, "groups");
  r.groups.combinations_enumerated = GetCount(g, "combinations_enumerated");
  r.groups.conflict_free = GetCount(g, "conflict_free");
  r.groups.greedy_groups = GetCount(g, "greedy_groups");
  for (const auto& [reason, count] : j.at("skip_reasons").items()) {
    r.skip_reasons[reason] = count.get<std::size_t>();
  }
  return r;
}

}  // namespace

RunReport ReportFromJson(const std::string& text) {
  try {
    return ReportFromJsonUnchecked(text);
  } catch (const json::exception& e) {
    ThrowInputError(std::string("malformed report: ") + e.what());
  }
}

std::string RenderReportTable(const RunReport& report) {
  std::ostringstream out;
  out << "instances in           " << report.instances_in << "\n"
      << "lines rejected         " << report.lines_rejected << "\n"
      << "instances skipped      " << report.instances_skipped << "\n"
      << "instances contributing " << report.instances_contributing << "\n"
      << "candidates scored      " << report.candidates_scored << "\n"
      << "pairs emitted          " << report.pairs_emitted << "\n";
  if (report.validation_pairs > 0) {
    out << "validation pairs       " << report.validation_pairs << "\n";
  }
  out << "\nconstraint                       count   mean CSR\n";
  for (const ConstraintStat& s : report.constraints) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-30s %8zu   %s\n", s.name.c_str(),
                  s.count, Fixed(s.mean(), 4).c_str());
    out << line;
  }
  out << "\nCSR histogram\n";
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    char line[96];
    std::snprintf(line, sizeof(line), "  [%.1f, %.1f%c %8zu\n",
                  static_cast<double>(i) / kHistogramBins,
                  static_cast<double>(i + 1) / kHistogramBins,
                  i + 1 == kHistogramBins ? ']' : ')', report.histogram[i]);
    out << line;
  }
  if (report.groups.groups > 0) {
    out << "\ngroups                 " << report.groups.groups << "\n"
        << "combinations evaluated " << report.groups.combinations_enumerated
        << "\n"
        << "conflict-free fraction "
        << Fixed(report.groups.conflict_free_fraction(), 4) << "\n";
    if (report.groups.greedy_groups > 0) {
      out << "greedy (approximate)   " << report.groups.greedy_groups << "\n";
    }
  }
  if (!report.skip_reasons.empty()) {
    out << "\nskipped\n";
    for (const auto& [reason, count] : report.skip_reasons) {
      out << "  " << reason << ": " << count << "\n";
    }
  }
  return out.str();
}

std::filesystem::path ReportTablePath(const std::filesystem::path& path) {
  std::filesystem::path table = path;
  table.replace_extension(".txt");
  if (table == path) table += ".table.txt";
  return table;
}

void EmitReport(const RunReport& report, const std::filesystem::path& path) {
  WriteFile(path, ReportToJson(report));
  WriteFile(ReportTablePath(path), RenderReportTable(report));
}

}  // namespace prefsynth

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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/oracles.h"
#include "prefsynth/config.h"
#include "prefsynth/error.h"
#include "prefsynth/loss_oracle.h"
#include "prefsynth/mock_sampler.h"
#include "prefsynth/pipeline.h"
#include "prefsynth/records.h"
#include "prefsynth/temporal.h"
#include "prefsynth/verifiers.h"

namespace prefsynth {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ScratchDir {
 public:
  ScratchDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("prefsynth_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------

std::string RandomString(std::mt19937_64& rng, std::size_t max_len,
                         const std::string& alphabet) {
  std::string s;
  for (std::size_t n = rng() % (max_len + 1); n > 0; --n) {
    s.push_back(alphabet[rng() % alphabet.size()]);
  }
  return s;
}

Outcome ReferenceVerifierFidelity() {
  std::mt19937_64 rng(20240601);
  const std::string label_alphabet = "abcAB ,";
  const std::string text_alphabet = "ab \t,";
  MatchOptions literal;
  literal.mode = MatchMode::kLiteral;
  literal.case_sensitive = true;

  std::size_t mismatches = 0, cases = 0;
  std::string first;
  const auto start = Clock::now();
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::string> vocab;
    for (int i = 0; i < 12; ++i) vocab.push_back(RandomString(rng, 6, label_alphabet));

    std::vector<std::string> options;
    for (std::size_t n = rng() % 21; n > 0; --n) options.push_back(vocab[rng() % vocab.size()]);
    Fine2Coarse f2c;
    for (std::size_t n = rng() % 6; n > 0; --n) {
      f2c[vocab[rng() % vocab.size()]] = vocab[rng() % vocab.size()];
    }

    std::string response;
    if (rng() % 5 == 0) {
      response = RandomString(rng, 200, label_alphabet);
    } else {
      const std::size_t answers = 1 + rng() % 6;
      for (std::size_t i = 0; i < answers; ++i) {
        if (i > 0) response += ", ";
        response += vocab[rng() % vocab.size()];
      }
    }

    std::string input = RandomString(rng, 200, text_alphabet);
    std::string span;
    if (!input.empty() && rng() % 2 == 0) {
      const std::size_t a = rng() % input.size();
      const std::size_t len = rng() % (input.size() - a + 1);
      span = input.substr(a, len);
      if (!span.empty() && rng() % 3 == 0) span[rng() % span.size()] = 'b';
    } else {
      span = RandomString(rng, 8, text_alphabet);
    }

    const auto answers = oracle::PySplit(response, ", ");
    const int want_option = oracle::LabelOption(answers, options);
    const int want_hier = oracle::LabelHierarchy(answers, f2c);
    const int want_min = oracle::EntityTypingVerifier(response, options, f2c);
    const int want_ext = oracle::Extractiveness(input, span);

    const double got_option = VerifyLabelOption(response, options, literal);
    const double got_hier = VerifyLabelHierarchy(response, f2c, literal);
    const double got_ext = VerifyExtractiveness(input, span, literal);
    double got_min = std::min(got_option, got_hier);
    if (!options.empty() && !f2c.empty()) {
      ConstraintSpec opt;
      opt.name = "label_option";
      opt.kind = ConstraintKind::kLabelOption;
      opt.match = literal;
      opt.options = options;
      ConstraintSpec hier;
      hier.name = "label_hierarchy";
      hier.kind = ConstraintKind::kLabelHierarchy;
      hier.match = literal;
      hier.fine2coarse = f2c;
      const Instance inst{"i", std::nullopt, input, std::nullopt,
                          {{"c", response, -1.0, 1}}};
      got_min = EvaluateInstance(inst, inst.candidates[0], {opt, hier},
                                 {Combinator::kMin})
                    .value;
    }
    cases += 4;
    const bool ok = got_option == want_option && got_hier == want_hier &&
                    got_ext == want_ext && got_min == want_min;
    if (!ok) {
      ++mismatches;
      if (first.empty()) first = "response='" + response + "'";
    }
  }
  const double secs = Seconds(start);
  Outcome o;
  o.pass = mismatches == 0 && secs < 5.0;
  o.detail = std::to_string(mismatches) + " mismatches over " +
             std::to_string(cases) + " checks in " + std::to_string(secs) +
             " s" + (first.empty() ? "" : ", first: " + first);
  return o;
}

// ---------------------------------------------------------------------------

struct RandomGroup {
  temporal::QuestionGroup group;
  std::vector<oracle::OracleMember> oracle_members;
  std::vector<temporal::RolePair> disjointness;
  std::vector<std::pair<int, int>> oracle_pairs;
  std::size_t m = 1;
};

RandomGroup MakeRandomGroup(std::mt19937_64& rng) {
  RandomGroup g;
  const std::size_t k = 1 + rng() % 4;
  g.m = 1 + rng() % 3;
  g.group.group_id = "g";
  const std::vector<std::string> events = {"e1", "e2", "e3", "e4", "e5"};
  for (std::size_t i = 0; i < k; ++i) {
    const int role = static_cast<int>(rng() % 3);
    temporal::GroupMember member{"m" + std::to_string(i),
                                 static_cast<temporal::Role>(role), {}};
    oracle::OracleMember om{member.instance_id, role, {}};
    for (std::size_t c = 0; c < g.m; ++c) {
      temporal::EventSet set;
      for (const auto& e : events) {
        if (rng() % 3 == 0) set.insert(e);
      }
      const double score = -0.5 * static_cast<double>(rng() % 4);
      const std::string id = "c" + std::to_string(c);
      member.candidates.push_back({id, set, score});
      om.candidates.push_back({id, {set.begin(), set.end()}, score});
    }
    g.group.members.push_back(std::move(member));
    g.oracle_members.push_back(std::move(om));
  }
  const std::vector<std::pair<int, int>> all = {{0, 2}, {0, 1}, {1, 2}};
  const unsigned mask = 1 + rng() % 7;
  for (int b = 0; b < 3; ++b) {
    if (mask & (1u << b)) {
      g.oracle_pairs.push_back(all[b]);
      g.disjointness.push_back({static_cast<temporal::Role>(all[b].first),
                                static_cast<temporal::Role>(all[b].second)});
    }
  }
  return g;
}

std::string ResolveAll(std::size_t* matches, std::size_t* tie_matches) {
  std::mt19937_64 rng(77);
  std::string transcript;
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomGroup g = MakeRandomGroup(rng);
    temporal::ResolveOptions options;
    options.candidates_per_member = g.m;
    const temporal::Resolution r =
        temporal::ResolveGroup(g.group, g.disjointness, options);
    const oracle::OracleBest want =
        oracle::BruteForceBest(g.oracle_members, g.oracle_pairs);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < r.best.choice.size(); ++i) {
      ids.push_back(r.prepared.members[i].candidates[r.best.choice[i]].candidate_id);
    }
    if (r.best.conflict_count == want.conflicts) ++*matches;
    if (ids == want.ids) ++*tie_matches;
    transcript += std::to_string(r.best.conflict_count);
    for (const auto& [inst, cand] : r.best.selection) {
      transcript += " " + inst + "=" + cand;
    }
    transcript += "\n";
  }
  return transcript;
}

Outcome ResolverOptimality() {
  std::size_t matches = 0, ties = 0, matches2 = 0, ties2 = 0;
  const std::string a = ResolveAll(&matches, &ties);
  const std::string b = ResolveAll(&matches2, &ties2);
  Outcome o;
  o.pass = matches == 1000 && ties == 1000 && a == b;
  o.detail = std::to_string(matches) + "/1000 optimal, " +
             std::to_string(ties) + "/1000 tie-break agreement, double run " +
             (a == b ? "identical" : "differs");
  return o;
}

// ---------------------------------------------------------------------------

struct ConflictCase {
  std::map<std::string, temporal::EventSet> assignment;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::int64_t expected;
};

Outcome ConflictSemantics() {
  using P = std::vector<std::pair<std::string, std::string>>;
  const P all = {{"before", "after"}, {"before", "during"}, {"during", "after"}};
  const P ba = {{"before", "after"}};
  const std::vector<ConflictCase> table = {
      {{{"before", {"e1"}}, {"after", {"e1"}}}, ba, 1},
      {{{"before", {"e1"}}, {"after", {"e2"}}}, ba, 0},
      {{{"before", {"e1", "e2"}}, {"after", {"e2"}}, {"during", {"e1"}}},
       {{"before", "after"}, {"before", "during"}}, 2},
      {{{"before", {}}, {"during", {}}, {"after", {}}}, all, 0},
      {{{"before", {"e1"}}, {"during", {"e1"}}, {"after", {"e1"}}}, all, 3},
      {{{"before", {"e1"}}, {"during", {"e1"}}, {"after", {"e1"}}}, ba, 1},
      {{{"before", {"e1", "e2", "e3"}}, {"after", {"e1", "e2", "e3"}}}, all, 3},
      {{{"before", {"e1", "e2"}}, {"during", {"e2", "e3"}}, {"after", {"e3", "e4"}}},
       all, 2},
      {{{"before", {"e1", "e2"}}, {"during", {"e2", "e3"}}, {"after", {"e3", "e4"}}},
       {{"during", "after"}}, 1},
      {{{"before", {"e1"}}}, all, 0},
      {{{"before", {"e1"}}, {"after", {"e1"}}}, {}, 0},
      {{{"during", {"x", "y"}}, {"after", {"y", "x", "z"}}}, all, 2},
      {{{"before", {"a"}}, {"during", {"a"}}}, {{"during", "after"}}, 0},
      {{{"before", {"a", "b", "c", "d"}}, {"after", {"c", "d", "e", "f"}}, {"during", {}}},
       all, 2},
      {{{"before", {"a"}}, {"during", {"b"}}, {"after", {"c"}}}, all, 0},
      {{{"before", {"a", "b"}}, {"during", {"a", "b"}}, {"after", {"a", "b"}}}, all, 6},
      {{{"before", {"a", "b"}}, {"during", {"a"}}, {"after", {"b"}}},
       {{"before", "during"}, {"before", "after"}}, 2},
      {{{"before", {"A"}}, {"after", {"a"}}}, ba, 0},
      {{{"before", {"e1"}}, {"after", {"e1 "}}}, ba, 0},
      {{{"during", {"a", "b", "c"}}, {"after", {"c"}}, {"before", {"c"}}},
       {{"during", "after"}, {"before", "after"}}, 2},
  };
  std::size_t exact = 0;
  std::string failed;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::int64_t got =
        temporal::CountConflicts(table[i].assignment, table[i].pairs);
    if (got == table[i].expected) {
      ++exact;
    } else {
      failed += " #" + std::to_string(i + 1) + "(got " + std::to_string(got) + ")";
    }
  }
  Outcome o;
  o.pass = exact == table.size();
  o.detail = std::to_string(exact) + "/" + std::to_string(table.size()) +
             " exact" + failed;
  return o;
}

// ---------------------------------------------------------------------------

const char kEntityYaml[] = R"(version: 1
composite:
  combinator: weighted_mean
constraints:
  - name: label_option
    kind: label_option
    options: [person, artist, location, city, organization, company]
  - name: label_hierarchy
    kind: label_hierarchy
    fine2coarse: {artist: person, city: location, company: organization}
selection:
  gap_epsilon: 0.1
  min_logprob_quantile: 0.25
  max_pairs_per_instance: 16
sampler:
  satisfying: ["person, artist", "location, city", "organization", "person"]
  violating: ["artist", "person, singer", "city, town", "company", "singer"]
  violation_rate: 0.5
deterministic_order: true
)";

void WriteSynthetic(const std::filesystem::path& path, std::size_t count,
                    std::size_t n, std::uint64_t seed,
                    const MockSamplerConfig& sampler) {
  LineWriter out(path);
  for (std::size_t i = 0; i < count; ++i) {
    Instance inst;
    inst.instance_id = "s" + std::to_string(i);
    inst.prompt = "synthetic prompt " + std::to_string(i);
    inst.candidates = MockSample(inst.prompt, n, seed, sampler);
    out.Write(SerializeInstance(inst));
  }
  out.Close();
}

Outcome PreferenceSoundness(const ScratchDir& dir) {
  PipelineConfig config = ParseConfig(kEntityYaml);
  config.io.input = dir / "sound_in.jsonl";
  config.io.preferences = dir / "sound_out.jsonl";
  WriteSynthetic(config.io.input, 10000, 4, 5, config.sampler);
  const RunReport report = RunPipeline(config);
  std::size_t checked = 0, violations = 0;
  ForEachLine(config.io.preferences, [&](std::size_t, const std::string& line) {
    const PreferenceRecord r = ParsePreferenceRecord(line);
    if (r.source != PreferenceSource::kInstanceCsr) return;
    ++checked;
    if (!(r.csr_chosen >= r.csr_rejected + config.selection.gap_epsilon - 1e-9)) {
      ++violations;
    }
  });
  Outcome o;
  o.pass = report.instances_in == 10000 && checked > 0 && violations == 0 &&
           checked == report.pairs_emitted;
  o.detail = std::to_string(checked) + " instance_csr records from " +
             std::to_string(report.instances_in) + " instances, " +
             std::to_string(violations) + " below the gap";
  return o;
}

// ---------------------------------------------------------------------------

Outcome LossHinge() {
  const MarginSettings zero{MarginMode::kConstant, 0.0, 1.0};
  const MarginSettings gap{};
  std::string detail;
  bool ok = true;

  const std::vector<ScoredCandidate> matched = {{"i", 0.0, -2.0}, {"j", 1.0, -1.0}};
  const std::vector<ScoredCandidate> swapped = {{"i", 0.0, -1.0}, {"j", 1.0, -2.0}};
  const double w1 = RankLoss(matched, zero).value;
  const double w2 = RankLoss(swapped, zero).value;
  const double w3 = RankLoss(swapped, gap).value;
  const bool worked = std::abs(w1 - 0.0) <= 1e-12 &&
                      std::abs(w2 - 1.0) <= 1e-12 &&
                      std::abs(w3 - 2.0) <= 1e-12;
  ok &= worked;
  detail += "worked pairs " + std::string(worked ? "ok" : "wrong");

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> score(-4.0, 0.0), bump(0.0, 1.0);
  std::size_t iff_failures = 0, monotone_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<ScoredCandidate> c(2 + rng() % 5);
    for (auto& x : c) x = {"x", (rng() % 5) / 4.0, score(rng)};
    if (t % 2 == 0) {
      for (auto& x : c) x.score = -4.0 + 2.0 * x.csr;
    }
    const double scale = 1.0 + bump(rng);
    const MarginSettings m{MarginMode::kCsrGap, 0.0, scale};
    bool satisfied = true;
    for (const auto& lo : c) {
      for (const auto& hi : c) {
        if (lo.csr < hi.csr - kCsrEpsilon &&
            hi.score < lo.score + scale * (hi.csr - lo.csr)) {
          satisfied = false;
        }
      }
    }
    const double base = RankLoss(c, m).value;
    if ((base == 0.0) != satisfied) ++iff_failures;

    const MarginSettings wider{MarginMode::kCsrGap, 0.0, scale + bump(rng)};
    const MarginSettings bigger_const{MarginMode::kConstant, 0.1 + bump(rng), 1.0};
    const MarginSettings small_const{MarginMode::kConstant, 0.1, 1.0};
    if (RankLoss(c, wider).value < base ||
        RankLoss(c, bigger_const).value < RankLoss(c, small_const).value) {
      ++monotone_failures;
    }
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].csr < c[lowest].csr) lowest = i;
    }
    auto raised = c;
    raised[lowest].score += bump(rng);
    if (RankLoss(raised, m).value < base - 1e-12) ++monotone_failures;
  }
  ok &= iff_failures == 0 && monotone_failures == 0;
  detail += ", zero-iff failures " + std::to_string(iff_failures) +
            ", monotonicity failures " + std::to_string(monotone_failures) +
            " over 1000 perturbations";
  return {ok, detail};
}

// ---------------------------------------------------------------------------

Outcome BinaryMode(const ScratchDir& dir) {
  PipelineConfig config = ParseConfig(kEntityYaml);
  config.composite.combinator = Combinator::kMin;
  config.selection.binary_mode = true;
  config.selection.min_logprob_quantile = 0.0;
  config.io.input = dir / "binary_in.jsonl";
  config.io.preferences = dir / "binary_out.jsonl";
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lp(-30.0, -0.1);
  {
    LineWriter out(config.io.input);
    for (int i = 0; i < 5000; ++i) {
      Instance inst{"b" + std::to_string(i), std::nullopt, "p", std::nullopt, {}};
      const auto& sat = config.sampler.satisfying;
      const auto& vio = config.sampler.violating;
      CandidateResponse good{"good", sat[rng() % sat.size()], lp(rng), 3};
      CandidateResponse bad{"bad", vio[rng() % vio.size()], lp(rng), 3};
      if (rng() % 2) {
        inst.candidates = {good, bad};
      } else {
        inst.candidates = {bad, good};
      }
      out.Write(SerializeInstance(inst));
    }
    out.Close();
  }
  const RunReport r = RunPipeline(config);
  std::size_t lines = 0;
  ForEachLine(config.io.preferences, [&](std::size_t, const std::string&) { ++lines; });
  Outcome o;
  o.pass = r.pairs_emitted == r.instances_in && lines == r.pairs_emitted &&
           r.instances_in == 5000;
  o.detail = "pairs_emitted=" + std::to_string(r.pairs_emitted) +
             " instances_in=" + std::to_string(r.instances_in);
  return o;
}

// ---------------------------------------------------------------------------

Outcome CsrReport(const ScratchDir& dir) {
  PipelineConfig config = ParseConfig(kEntityYaml);
  config.io.input = dir / "report_in.jsonl";
  config.io.preferences = dir / "report_out.jsonl";
  config.io.report = dir / "report.json";
  std::vector<std::string> texts;
  for (int i = 0; i < 300; ++i) texts.push_back(i % 2 ? "person, singer" : "singer");
  for (int i = 0; i < 200; ++i) texts.push_back(i % 2 ? "artist" : "city, person");
  for (int i = 0; i < 500; ++i) texts.push_back(i % 2 ? "person, artist" : "location");
  std::mt19937_64 rng(101);
  std::shuffle(texts.begin(), texts.end(), rng);
  {
    LineWriter out(config.io.input);
    for (std::size_t i = 0; i < texts.size(); i += 2) {
      Instance inst{"r" + std::to_string(i / 2), std::nullopt, "p", std::nullopt,
                    {{"a", texts[i], -1.0, 1}, {"b", texts[i + 1], -2.0, 1}}};
      out.Write(SerializeInstance(inst));
    }
    out.Close();
  }
  RunPipeline(config);
  const RunReport r = ReportFromJson(ReadFile(config.io.report));
  bool ok = r.constraints.size() == 2;
  std::string detail;
  if (ok) {
    const auto& opt = r.constraints[0];
    const auto& hier = r.constraints[1];
    ok = opt.name == "label_option" && hier.name == "label_hierarchy" &&
         opt.count == 1000 && hier.count == 1000 && opt.sum == 700.0 &&
         hier.sum == 800.0 && opt.mean() == 0.7 && hier.mean() == 0.8;
    detail = "label_option mean " + std::to_string(opt.mean()) +
             " (planted 0.7), label_hierarchy mean " +
             std::to_string(hier.mean()) + " (planted 0.8)";
  }
  std::size_t hist = 0;
  for (std::size_t b : r.histogram) hist += b;
  ok &= hist == 1000;
  detail += ", histogram total " + std::to_string(hist);
  return {ok, detail};
}

// ---------------------------------------------------------------------------

int RunCli(const std::string& args) {
  const std::string cmd =
      std::string(PREFSYNTH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Throughput(const ScratchDir& dir) {
  {
    std::ofstream cfg(dir / "throughput.yaml");
    cfg << kEntityYaml;
  }
  const std::string cfg = (dir / "throughput.yaml").string();
  const std::string input = (dir / "big.jsonl").string();
  if (RunCli("mock-sample -c " + cfg + " --count 100000 -n 4 --seed 9 -o " +
             input) != 0) {
    return {false, "mock-sample failed"};
  }
  double worst = 0.0;
  for (int run = 0; run < 2; ++run) {
    const auto start = Clock::now();
    const int code =
        RunCli("build -c " + cfg + " -i " + input + " -o " +
               (dir / ("big_out" + std::to_string(run) + ".jsonl")).string() +
               " --seed 9 --deterministic-order");
    worst = std::max(worst, Seconds(start));
    if (code != 0) return {false, "build exited with " + std::to_string(code)};
  }
  const std::string a = ReadFile(dir / "big_out0.jsonl");
  const std::string b = ReadFile(dir / "big_out1.jsonl");
  Outcome o;
  o.pass = !a.empty() && a == b && worst < 60.0;
  o.detail = "100000 instances, slowest build " + std::to_string(worst) +
             " s, outputs " + (a == b ? "byte-identical" : "differ") + " (" +
             std::to_string(a.size()) + " bytes)";
  return o;
}

}  // namespace
}  // namespace prefsynth

int main() {
  using prefsynth::Outcome;
  prefsynth::ScratchDir dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reference_verifier_fidelity", prefsynth::ReferenceVerifierFidelity},
      {"resolver_optimality", prefsynth::ResolverOptimality},
      {"conflict_semantics", prefsynth::ConflictSemantics},
      {"preference_soundness", [&] { return prefsynth::PreferenceSoundness(dir); }},
      {"loss_hinge", prefsynth::LossHinge},
      {"binary_csr_mode", [&] { return prefsynth::BinaryMode(dir); }},
      {"csr_report_reproduction", [&] { return prefsynth::CsrReport(dir); }},
      {"determinism_and_throughput", [&] { return prefsynth::Throughput(dir); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

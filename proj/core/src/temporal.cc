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

#include "prefsynth/temporal.h"

#include <algorithm>
#include <limits>

#include "prefsynth/error.h"
#include "prefsynth/text.h"
#include "prefsynth/types.h"

namespace prefsynth::temporal {
namespace {

std::pair<Role, Role> Unordered(const RolePair& p) {
  return p.first < p.second ? p : RolePair{p.second, p.first};
}

std::size_t SaturatingPower(std::size_t base, std::size_t exponent,
                            std::size_t limit) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && result > limit / base) return limit + 1;
    result *= base;
  }
  return result;
}

}  // namespace

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kBefore:
      return "before";
    case Role::kDuring:
      return "during";
    case Role::kAfter:
      return "after";
  }
  return "unknown";
}

std::optional<Role> TryParseRole(std::string_view name) {
  const std::string lowered = text::ToLowerAscii(text::Trim(name));
  if (lowered == "before") return Role::kBefore;
  if (lowered == "during") return Role::kDuring;
  if (lowered == "after") return Role::kAfter;
  return std::nullopt;
}

Role ParseRole(std::string_view name) {
  const std::optional<Role> role = TryParseRole(name);
  if (!role) {
    ThrowConfigError("unknown temporal role '" + std::string(name) +
                     "' (expected before, during or after)");
  }
  return *role;
}

std::vector<RolePair> DefaultDisjointness() {
  return {{Role::kBefore, Role::kAfter},
          {Role::kBefore, Role::kDuring},
          {Role::kDuring, Role::kAfter}};
}

void ValidateDisjointness(const std::vector<RolePair>& pairs) {
  std::set<RolePair> seen;
  for (const RolePair& p : pairs) {
    if (p.first == p.second) {
      ThrowConfigError("disjointness pair (" + std::string(RoleName(p.first)) +
                       ", " + std::string(RoleName(p.second)) +
                       ") relates a role to itself");
    }
    if (!seen.insert(Unordered(p)).second) {
      ThrowConfigError("duplicate disjointness pair (" +
                       std::string(RoleName(p.first)) + ", " +
                       std::string(RoleName(p.second)) + ")");
    }
  }
}

EventSet ParseAnswerSet(std::string_view response, std::string_view delimiter,
                        bool lowercase) {
  EventSet events;
  for (const std::string& piece : text::SplitExact(response, delimiter)) {
    std::string_view item = text::Trim(piece);
    if (item.empty()) continue;
    events.insert(lowercase ? text::ToLowerAscii(item) : std::string(item));
  }
  return events;
}

std::int64_t CountConflicts(const std::map<Role, EventSet>& assignment,
                            const std::vector<RolePair>& disjointness) {
  static const EventSet kEmpty;
  auto lookup = [&](Role r) -> const EventSet& {
    auto it = assignment.find(r);
    return it == assignment.end() ? kEmpty : it->second;
  };
  std::int64_t conflicts = 0;
  for (const RolePair& pair : disjointness) {
    const EventSet& a = lookup(pair.first);
    const EventSet& b = lookup(pair.second);
    const EventSet& small = a.size() <= b.size() ? a : b;
    const EventSet& large = a.size() <= b.size() ? b : a;
    for (const std::string& e : small) {
      if (large.count(e) != 0) ++conflicts;
    }
  }
  return conflicts;
}

std::int64_t CountConflicts(
    const std::map<std::string, EventSet>& assignment,
    const std::vector<std::pair<std::string, std::string>>& disjointness) {
  std::map<Role, EventSet> typed;
  for (const auto& [name, events] : assignment) {
    EventSet& merged = typed[ParseRole(name)];
    merged.insert(events.begin(), events.end());
  }
  std::vector<RolePair> pairs;
  pairs.reserve(disjointness.size());
  for (const auto& [a, b] : disjointness) {
    pairs.emplace_back(ParseRole(a), ParseRole(b));
  }
  return CountConflicts(typed, pairs);
}

double GroupCsr(std::int64_t conflict_count, std::int64_t total_answered) {
  if (total_answered <= 0 || conflict_count <= 0) return 1.0;
  return std::max(0.0, 1.0 - static_cast<double>(conflict_count) /
                                 static_cast<double>(total_answered));
}

void ValidateGroup(const QuestionGroup& group) {
  if (group.members.empty()) {
    ThrowInputError("group '" + group.group_id + "' has no members");
  }
  for (const GroupMember& m : group.members) {
    if (m.candidates.empty()) {
      ThrowInputError("group '" + group.group_id + "': member '" +
                      m.instance_id + "' has no candidates");
    }
  }
}

QuestionGroup PrepareGroup(const QuestionGroup& group, std::size_t m) {
  if (m == 0) ThrowConfigError("candidates_per_member must be >= 1");
  QuestionGroup prepared;
  prepared.group_id = group.group_id;
  prepared.members.reserve(group.members.size());
  for (const GroupMember& member : group.members) {
    GroupMember out;
    out.instance_id = member.instance_id;
    out.role = member.role;
    out.candidates = member.candidates;
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const MemberCandidate& a, const MemberCandidate& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.candidate_id < b.candidate_id;
                     });
    if (out.candidates.size() > m) out.candidates.resize(m);
    while (!out.candidates.empty() && out.candidates.size() < m) {
      out.candidates.push_back(out.candidates.front());
    }
    prepared.members.push_back(std::move(out));
  }
  return prepared;
}

Combination EvaluateCombination(const QuestionGroup& prepared,
                                const std::vector<std::size_t>& choice,
                                const std::vector<RolePair>& disjointness) {
  if (choice.size() != prepared.members.size()) {
    ThrowInternalError("combination size does not match group size");
  }
  Combination combo;
  combo.choice = choice;
  std::map<Role, EventSet> by_role;
  EventSet answered;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    const GroupMember& member = prepared.members[i];
    if (choice[i] >= member.candidates.size()) {
      ThrowInternalError("combination index out of range");
    }
    const MemberCandidate& c = member.candidates[choice[i]];
    combo.selection[member.instance_id] = c.candidate_id;
    combo.score_sum += c.score;
    by_role[member.role].insert(c.answers.begin(), c.answers.end());
    answered.insert(c.answers.begin(), c.answers.end());
  }
  combo.conflict_count = CountConflicts(by_role, disjointness);
  combo.total_answered = static_cast<std::int64_t>(answered.size());
  combo.group_csr = GroupCsr(combo.conflict_count, combo.total_answered);
  return combo;
}

bool BetterCombination(const QuestionGroup& prepared, const Combination& a,
                       const Combination& b) {
  if (a.conflict_count != b.conflict_count) {
    return a.conflict_count < b.conflict_count;
  }
  if (a.score_sum > b.score_sum + kCsrEpsilon) return true;
  if (b.score_sum > a.score_sum + kCsrEpsilon) return false;
  for (std::size_t i = 0; i < a.choice.size(); ++i) {
    const std::string& ida = prepared.members[i].candidates[a.choice[i]]
                                 .candidate_id;
    const std::string& idb = prepared.members[i].candidates[b.choice[i]]
                                 .candidate_id;
    if (ida != idb) return ida < idb;
  }
  return false;
}

namespace {

void ResolveGreedy(const std::vector<RolePair>& disjointness,
                   const ResolveOptions& options, Resolution& out) {
  const QuestionGroup& prepared = out.prepared;
  std::vector<std::size_t> choice(prepared.members.size(), 0);
  Combination current = EvaluateCombination(prepared, choice, disjointness);
  out.enumerated = 1;
  for (int sweep = 0; sweep < options.greedy_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < prepared.members.size(); ++i) {
      for (std::size_t c = 0; c < prepared.members[i].candidates.size(); ++c) {
        if (c == current.choice[i]) continue;
        std::vector<std::size_t> trial_choice = current.choice;
        trial_choice[i] = c;
        Combination trial =
            EvaluateCombination(prepared, trial_choice, disjointness);
        ++out.enumerated;
        if (BetterCombination(prepared, trial, current)) {
          current = std::move(trial);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  out.best = std::move(current);
  out.greedy = true;
}

}  // namespace

Resolution ResolveGroup(const QuestionGroup& group,
                        const std::vector<RolePair>& disjointness,
                        const ResolveOptions& options) {
  ValidateGroup(group);
  ValidateDisjointness(disjointness);
  Resolution out;
  out.prepared = PrepareGroup(group, options.candidates_per_member);
  const QuestionGroup& prepared = out.prepared;
  const std::size_t k = prepared.members.size();
  const std::size_t m = options.candidates_per_member;
  const std::size_t total = SaturatingPower(m, k, options.enumeration_cap);

  if (total > options.enumeration_cap) {
    if (options.fallback == Fallback::kGreedy) {
      ResolveGreedy(disjointness, options, out);
      return out;
    }
    throw Error(ErrorCode::kPipeline,
                "group '" + group.group_id + "': " + std::to_string(m) + "^" +
                    std::to_string(k) +
                    " combinations exceed the enumeration cap of " +
                    std::to_string(options.enumeration_cap) +
                    "; set fallback: greedy or raise enumeration_cap");
  }

  std::vector<std::size_t> choice(k, 0);
  bool have_best = false;
  if (options.keep_all) out.all.reserve(total);
  while (true) {
    Combination combo = EvaluateCombination(prepared, choice, disjointness);
    ++out.enumerated;
    if (!have_best || BetterCombination(prepared, combo, out.best)) {
      out.best = combo;
      have_best = true;
    }
    if (options.keep_all) out.all.push_back(std::move(combo));
    // Odometer increment, last member fastest.
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++choice[pos] < m) break;
      choice[pos] = 0;
      if (pos == 0) return out;
    }
    if (k == 0) return out;
  }
}

std::vector<MemberPreference> PropagateLabels(const Combination& best,
                                              const QuestionGroup& group) {
  std::vector<MemberPreference> out;
  out.reserve(group.members.size());
  for (const GroupMember& member : group.members) {
    auto it = best.selection.find(member.instance_id);
    if (it == best.selection.end()) {
      ThrowInternalError("combination does not cover member '" +
                         member.instance_id + "'");
    }
    MemberPreference pref;
    pref.instance_id = member.instance_id;
    pref.preferred = it->second;
    for (const MemberCandidate& c : member.candidates) {
      if (c.candidate_id == pref.preferred) continue;
      if (std::find(pref.dispreferred.begin(), pref.dispreferred.end(),
                    c.candidate_id) != pref.dispreferred.end()) {
        continue;
      }
      pref.dispreferred.push_back(c.candidate_id);
    }
    out.push_back(std::move(pref));
  }
  return out;
}

}  // namespace prefsynth::temporal

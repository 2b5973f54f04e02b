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

#ifndef PREFSYNTH_TEMPORAL_H_
#define PREFSYNTH_TEMPORAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prefsynth::temporal {

enum class Role { kBefore, kDuring, kAfter };

std::string_view RoleName(Role role);

// Throws a config error for anything other than before / during / after.
Role ParseRole(std::string_view name);
std::optional<Role> TryParseRole(std::string_view name);

using RolePair = std::pair<Role, Role>;

// {(before, after), (before, during), (during, after)}.
std::vector<RolePair> DefaultDisjointness();

// Rejects self-pairs and duplicate (unordered) pairs.
void ValidateDisjointness(const std::vector<RolePair>& pairs);

using EventSet = std::set<std::string>;

// Splits on `delimiter`, trims, optionally lowercases and drops empty items.
EventSet ParseAnswerSet(std::string_view response, std::string_view delimiter,
                        bool lowercase = true);

// Sum over the declared disjoint role pairs of the size of the intersection
// of the two roles' event sets. Roles absent from `assignment` contribute
// nothing.
std::int64_t CountConflicts(const std::map<Role, EventSet>& assignment,
                            const std::vector<RolePair>& disjointness);

// String-keyed variant for configuration-facing callers; unknown role names
// raise a config error.
std::int64_t CountConflicts(
    const std::map<std::string, EventSet>& assignment,
    const std::vector<std::pair<std::string, std::string>>& disjointness);

// 1 when nothing was answered or nothing conflicts, otherwise
// max(0, 1 - conflicts / total_answered).
double GroupCsr(std::int64_t conflict_count, std::int64_t total_answered);

struct MemberCandidate {
  std::string candidate_id;
  EventSet answers;
  double score = 0.0;  // sequence score used for tie-breaking
};

struct GroupMember {
  std::string instance_id;
  Role role = Role::kBefore;
  std::vector<MemberCandidate> candidates;
};

struct QuestionGroup {
  std::string group_id;
  std::vector<GroupMember> members;
};

// Throws an input error when the group is empty or a member has no
// candidates.
void ValidateGroup(const QuestionGroup& group);

struct Combination {
  // choice[i] indexes members[i].candidates in the prepared group.
  std::vector<std::size_t> choice;
  // instance_id -> candidate_id.
  std::map<std::string, std::string> selection;
  std::int64_t conflict_count = 0;
  std::int64_t total_answered = 0;
  double group_csr = 1.0;
  double score_sum = 0.0;
};

enum class Fallback { kError, kGreedy };

struct ResolveOptions {
  std::size_t candidates_per_member = 2;
  std::size_t enumeration_cap = 4096;
  Fallback fallback = Fallback::kError;
  int greedy_sweeps = 3;
  bool keep_all = true;  // fill Resolution::all
};

struct Resolution {
  // The member candidate lists actually searched (after trimming/padding to
  // candidates_per_member).
  QuestionGroup prepared;
  Combination best;
  std::vector<Combination> all;
  std::size_t enumerated = 0;
  bool greedy = false;
};

// Trims or pads each member to exactly `m` candidates. Members with more
// than m keep their m highest-scoring candidates (ties by candidate_id);
// members with fewer repeat their top candidate.
QuestionGroup PrepareGroup(const QuestionGroup& group, std::size_t m);

// Evaluates one selection over a prepared group.
Combination EvaluateCombination(const QuestionGroup& prepared,
                                const std::vector<std::size_t>& choice,
                                const std::vector<RolePair>& disjointness);

// True when `a` is strictly preferred to `b`: fewer conflicts, then higher
// summed score, then the lexicographically smaller candidate-id sequence.
bool BetterCombination(const QuestionGroup& prepared, const Combination& a,
                       const Combination& b);

// Enumerates all m^k combinations and returns the best one. Above the
// enumeration cap this either throws a pipeline error or, with
// Fallback::kGreedy, runs coordinate descent and sets Resolution::greedy.
Resolution ResolveGroup(const QuestionGroup& group,
                        const std::vector<RolePair>& disjointness,
                        const ResolveOptions& options = {});

struct MemberPreference {
  std::string instance_id;
  std::string preferred;
  std::vector<std::string> dispreferred;  // distinct ids, prepared order
};

// Each member's chosen candidate is preferred over all of its unchosen
// candidates.
std::vector<MemberPreference> PropagateLabels(const Combination& best,
                                              const QuestionGroup& group);

}  // namespace prefsynth::temporal

#endif  // PREFSYNTH_TEMPORAL_H_

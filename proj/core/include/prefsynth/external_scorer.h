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

#ifndef PREFSYNTH_EXTERNAL_SCORER_H_
#define PREFSYNTH_EXTERNAL_SCORER_H_

#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "prefsynth/verifiers.h"

namespace prefsynth {

// Wire format of the external-scorer protocol, one JSON object per line.
//   request: {"pair_id": "...", "input": "...", "response": "..."}
//   reply:   {"pair_id": "...", "score": 0.87}
std::string EncodeScoreRequest(const ScoringPair& pair);

struct ScoreReply {
  std::string pair_id;
  double score = 0.0;
};

// Throws an input error on malformed replies.
ScoreReply DecodeScoreReply(const std::string& line);

// Relevance scorer backed by a long-lived child process speaking the
// line-delimited protocol on stdin/stdout. Replies may arrive in any order;
// they are matched by pair_id. The process is started lazily on the first
// batch and terminated on destruction. Calls are serialized.
class SubprocessScorer : public RelevanceScorer {
 public:
  SubprocessScorer(std::string name, std::vector<std::string> argv);
  ~SubprocessScorer() override;

  SubprocessScorer(const SubprocessScorer&) = delete;
  SubprocessScorer& operator=(const SubprocessScorer&) = delete;

  std::string name() const override { return name_; }
  std::vector<double> ScoreBatch(std::span<const ScoringPair> pairs) override;

 private:
  void Start();
  void Stop();

  std::string name_;
  std::vector<std::string> argv_;
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
};

}  // namespace prefsynth

#endif  // PREFSYNTH_EXTERNAL_SCORER_H_

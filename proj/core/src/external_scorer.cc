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

#include "prefsynth/external_scorer.h"

#include <csignal>
#include <cerrno>
#include <cstring>
#include <map>
#include <thread>

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nlohmann/json.hpp"
#include "prefsynth/error.h"

namespace prefsynth {
namespace {

using nlohmann::json;

[[noreturn]] void ScorerFailure(const std::string& name,
                                const std::string& what) {
  throw Error(ErrorCode::kPipeline,
              "external scorer '" + name + "': " + what);
}

bool WriteAll(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

std::string EncodeScoreRequest(const ScoringPair& pair) {
  nlohmann::ordered_json j = {{"pair_id", pair.pair_id},
            {"input", pair.input},
            {"response", pair.response}};
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ScoreReply DecodeScoreReply(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    ThrowInputError("malformed scorer reply: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("pair_id") || !j.contains("score") ||
      !j["pair_id"].is_string() || !j["score"].is_number()) {
    ThrowInputError("scorer reply must be {pair_id: string, score: number}");
  }
  return {j["pair_id"].get<std::string>(), j["score"].get<double>()};
}

SubprocessScorer::SubprocessScorer(std::string name,
                                   std::vector<std::string> argv)
    : name_(std::move(name)), argv_(std::move(argv)) {
  if (argv_.empty()) {
    ThrowConfigError("external scorer '" + name_ + "' needs a command");
  }
}

SubprocessScorer::~SubprocessScorer() { Stop(); }

void SubprocessScorer::Start() {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) ScorerFailure(name_, "pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ScorerFailure(name_, "pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) ScorerFailure(name_, "fork() failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> args;
    for (std::string& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  read_buffer_.clear();
}

void SubprocessScorer::Stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

std::vector<double> SubprocessScorer::ScoreBatch(
    std::span<const ScoringPair> pairs) {
  std::lock_guard<std::mutex> lock(mu_);
  if (pairs.empty()) return {};
  if (pid_ < 0) Start();

  std::map<std::string, std::vector<std::size_t>> pending;
  std::string payload;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pending[pairs[i].pair_id].push_back(i);
    payload += EncodeScoreRequest(pairs[i]);
    payload.push_back('\n');
  }

  // The writer runs concurrently so that a child replying eagerly cannot
  // deadlock against a full stdin pipe.
  bool write_ok = true;
  std::thread writer([&] { write_ok = WriteAll(to_child_, payload); });

  std::vector<double> scores(pairs.size(), -1.0);
  std::size_t remaining = pairs.size();
  char chunk[4096];
  std::string failure;
  while (remaining > 0 && failure.empty()) {
    const std::size_t newline = read_buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = read_buffer_.substr(0, newline);
      read_buffer_.erase(0, newline + 1);
      if (line.empty()) continue;
      ScoreReply reply;
      try {
        reply = DecodeScoreReply(line);
      } catch (const Error& e) {
        failure = e.what();
        break;
      }
      auto it = pending.find(reply.pair_id);
      if (it == pending.end() || it->second.empty()) {
        failure = "unexpected pair_id '" + reply.pair_id + "'";
        break;
      }
      if (!(reply.score >= 0.0 && reply.score <= 1.0)) {
        failure = "score " + std::to_string(reply.score) +
                  " outside [0, 1] for pair '" + reply.pair_id + "'";
        break;
      }
      scores[it->second.back()] = reply.score;
      it->second.pop_back();
      --remaining;
      continue;
    }
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      failure = "process exited before replying to all " +
                std::to_string(pairs.size()) + " requests";
      break;
    }
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }

  if (!failure.empty()) {
    // Killing the child unblocks a writer stuck on a full pipe (EPIPE).
    if (pid_ > 0) ::kill(pid_, SIGKILL);
    writer.join();
    Stop();
    ScorerFailure(name_, failure);
  }
  writer.join();
  if (!write_ok) ScorerFailure(name_, "failed to write requests");
  return scores;
}

}  // namespace prefsynth

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

#ifndef PREFSYNTH_ERROR_H_
#define PREFSYNTH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace prefsynth {

// Error categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
  kConfig,    // invalid configuration; detected before any data is read
  kInput,     // a single malformed record or argument
  kData,      // dataset-level failure (e.g. reject threshold exceeded)
  kIo,        // unreadable or unwritable path
  kPipeline,  // runtime failure of a stage (external scorer, enumeration cap)
  kInternal,  // broken invariant
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void ThrowConfigError(const std::string& message);
[[noreturn]] void ThrowInputError(const std::string& message);
[[noreturn]] void ThrowInternalError(const std::string& message);

// Re-throws `error` with "[phase] " prepended to its message.
[[noreturn]] void RethrowWithPhase(const Error& error, std::string_view phase);

// Exit status used by the command line tool.
int ExitCodeFor(ErrorCode code);

}  // namespace prefsynth

#endif  // PREFSYNTH_ERROR_H_

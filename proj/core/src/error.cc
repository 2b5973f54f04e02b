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

#include "prefsynth/error.h"

namespace prefsynth {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return "config error";
    case ErrorCode::kInput:
      return "input error";
    case ErrorCode::kData:
      return "data error";
    case ErrorCode::kIo:
      return "I/O error";
    case ErrorCode::kPipeline:
      return "pipeline error";
    case ErrorCode::kInternal:
      return "internal invariant violation";
  }
  return "error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void ThrowConfigError(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

void ThrowInputError(const std::string& message) {
  throw Error(ErrorCode::kInput, message);
}

void ThrowInternalError(const std::string& message) {
  throw Error(ErrorCode::kInternal, message);
}

void RethrowWithPhase(const Error& error, std::string_view phase) {
  throw Error(error.code(),
              "[" + std::string(phase) + "] " + std::string(error.what()));
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return 1;
    case ErrorCode::kInput:
    case ErrorCode::kData:
    case ErrorCode::kIo:
    case ErrorCode::kPipeline:
      return 2;
    case ErrorCode::kInternal:
      return 3;
  }
  return 3;
}

}  // namespace prefsynth

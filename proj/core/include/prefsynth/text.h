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

#ifndef PREFSYNTH_TEXT_H_
#define PREFSYNTH_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace prefsynth::text {

// ASCII whitespace trim.
std::string_view Trim(std::string_view s);

std::string ToLowerAscii(std::string_view s);

// Collapses runs of whitespace to a single space and trims both ends.
std::string CollapseWhitespace(std::string_view s);

// Splits on every occurrence of `delimiter`, keeping empty pieces, the same
// way Python's str.split(sep) does. An empty delimiter yields {s}.
std::vector<std::string> SplitExact(std::string_view s,
                                    std::string_view delimiter);

// Lowercased word tokens with ASCII punctuation removed.
std::vector<std::string> WordTokens(std::string_view s);

}  // namespace prefsynth::text

#endif  // PREFSYNTH_TEXT_H_

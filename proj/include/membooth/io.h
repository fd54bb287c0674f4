// Copyright 2026 The membooth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace membooth {

/// Whole file as bytes; throws Error(kIo) when unreadable.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view content);
bool FileExists(const std::string& path);

/// Lines without terminators; a trailing '\r' is dropped.
std::vector<std::string> SplitLines(std::string_view text);
std::vector<std::string> SplitTabs(std::string_view line);

/// Strict integer parse of the whole string; throws Error(kParse).
int64_t ParseInt(std::string_view text, std::string_view what);

}  // namespace membooth

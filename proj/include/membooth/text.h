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

#include <string>
#include <string_view>
#include <vector>

namespace membooth {

/// Splits on ASCII whitespace; empty pieces are dropped.
std::vector<std::string> SplitWhitespace(std::string_view text);

/// Removes leading and trailing characters that are neither letters nor
/// digits. Casing and internal characters (hyphens, apostrophes, ...) are
/// kept. Works on UTF-8; non-ASCII code points outside the common
/// punctuation blocks count as letters.
std::string StripPunctuation(std::string_view raw);

/// Lowercases ASCII, Latin-1, Greek and Cyrillic capitals.
std::string Lowercase(std::string_view text);

/// Normalized form of a single raw token: lowercase, outer punctuation
/// stripped. An empty result means "not a word".
std::string NormalizeToken(std::string_view raw);

/// Normalizes every whitespace-separated word and joins the non-empty ones
/// with a single space. Idempotent.
std::string NormalizePhrase(std::string_view text);

bool ContainsLetter(std::string_view text);

/// Number of Unicode code points (invalid bytes count as one each).
std::size_t CodePointCount(std::string_view text);

void AppendUtf8(char32_t cp, std::string& out);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace membooth

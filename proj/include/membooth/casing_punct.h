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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "membooth/memory_decoder.h"
#include "membooth/memory_store.h"

namespace membooth {

enum class Punct { kNone, kPeriod, kComma, kQuestion };

struct CasedToken {
  std::string text;
  Punct trailing = Punct::kNone;
  enum class Source { kRule, kMemory };
  Source source = Source::kRule;

  /// Text followed by its punctuation mark.
  std::string Render() const;
  bool operator==(const CasedToken&) const = default;
};

/// Words that are always written with a fixed casing ("I", "NASA", ...),
/// keyed by normalized form.
class CasingLexicon {
 public:
  CasingLexicon() = default;
  explicit CasingLexicon(const std::vector<std::string>& forms);
  const std::string* Find(std::string_view normalized) const;
  std::size_t size() const { return forms_.size(); }

 private:
  std::unordered_map<std::string, std::string> forms_;
};

/// One cased form per line.
CasingLexicon ReadCasingLexicon(const std::string& path);

/// Memory hits take the entry's surface casing; everything else is cased
/// by rule (lexicon, then capitalized when sentence-initial). Throws
/// kDanglingProvenance when a hit's entry is missing from `snapshot`.
std::vector<CasedToken> ApplyCasing(std::span<const DecodedToken> tokens,
                                    const MemorySnapshot& snapshot,
                                    const CasingLexicon& lexicon = {},
                                    bool sentence_initial = true);

inline constexpr int64_t kDefaultPauseMs = 700;

/// `gaps[i]` is the silence between token i and i+1. A period follows any
/// gap of at least `pause_ms` and the final token; rule-cased tokens after
/// a period are capitalized.
std::vector<CasedToken> Punctuate(std::vector<CasedToken> tokens,
                                  std::span<const int64_t> gaps,
                                  int64_t pause_ms = kDefaultPauseMs);

std::string CapitalizeFirst(std::string_view word);

}  // namespace membooth

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
#include <vector>

namespace membooth {

/// One spoken reference word and what the baseline recognizer hears.
struct ScriptToken {
  std::string ref_surface;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  /// Normalized emission, possibly several space-separated words.
  std::string confused_form;
  bool is_new_word = false;

  bool operator==(const ScriptToken&) const = default;
};

struct Script {
  std::string name;
  std::vector<ScriptToken> tokens;

  int64_t duration_ms() const {
    return tokens.empty() ? 0 : tokens.back().end_ms;
  }
  /// Throws Error(kParse) on overlapping, unordered or empty-form tokens.
  void Validate() const;
};

/// Script file: `#` comments, then one token per line,
/// `ref_surface<TAB>start_ms<TAB>end_ms<TAB>confused_form<TAB>0|1`.
Script ParseScript(std::string_view text, std::string name = {});
Script ReadScript(const std::string& path);
std::string FormatScript(const Script& script);

/// A reference segment is the time range [start_ms, end_ms); its words are
/// the script tokens whose start falls inside it.
struct RefSegment {
  int64_t start_ms = 0;
  int64_t end_ms = 0;
};

/// `start_ms<TAB>end_ms` per line.
std::vector<RefSegment> ParseSegments(std::string_view text);
std::vector<RefSegment> ReadSegments(const std::string& path);
std::string FormatSegments(const std::vector<RefSegment>& segments);

struct BeamToken {
  std::string text;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  /// Index of the script token this word was decoded from.
  std::size_t source = 0;

  bool operator==(const BeamToken&) const = default;
};

/// N ranked hypotheses over the same stretch of audio; beams[0] is the top.
struct HypothesisBeam {
  std::vector<std::vector<BeamToken>> beams;

  std::size_t n_best() const { return beams.size(); }
  bool empty() const { return beams.empty() || beams.front().empty(); }
  const std::vector<BeamToken>& top() const { return beams.front(); }
  bool operator==(const HypothesisBeam&) const = default;
};

inline constexpr std::size_t kDefaultNBest = 4;
inline constexpr std::size_t kDefaultMaxDivergence = 3;

/// Plays back `slice` as one decoded chunk. The top beam emits every
/// token's confused form; beams 1..n_best-1 replace up to `max_divergence`
/// trailing words with alternates, the count drawn from `divergence_seed`.
/// `source_offset` is the script index of slice[0].
HypothesisBeam RecognizeChunk(std::span<const ScriptToken> slice,
                              std::size_t n_best, uint64_t divergence_seed,
                              std::size_t max_divergence = kDefaultMaxDivergence,
                              std::size_t source_offset = 0);

/// Seed derived from the chunk content only, so that identical chunks
/// diverge identically across sessions.
uint64_t ChunkDivergenceSeed(std::span<const ScriptToken> slice,
                             std::size_t source_offset);

}  // namespace membooth

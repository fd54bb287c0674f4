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

#include "membooth/sim_recognizer.h"

#include <algorithm>
#include <random>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/text.h"

namespace membooth {

void Script::Validate() const {
  int64_t prev_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const ScriptToken& t = tokens[i];
    const std::string where =
        (name.empty() ? std::string("script") : name) + " token " +
        std::to_string(i + 1);
    if (t.start_ms >= t.end_ms)
      throw Error(ErrorCode::kParse, where + ": start must precede end");
    if (t.start_ms < prev_end)
      throw Error(ErrorCode::kParse, where + ": overlaps previous token");
    if (NormalizePhrase(t.confused_form).empty())
      throw Error(ErrorCode::kParse, where + ": empty confused form");
    prev_end = t.end_ms;
  }
}

Script ParseScript(std::string_view text, std::string name) {
  Script script;
  script.name = std::move(name);
  std::size_t line_no = 0;
  for (const auto& line : SplitLines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = SplitTabs(line);
    if (f.size() != 5)
      throw Error(ErrorCode::kParse, "script line " + std::to_string(line_no) +
                                         ": expected 5 tab-separated fields");
    ScriptToken t;
    t.ref_surface = f[0];
    t.start_ms = ParseInt(f[1], "start_ms");
    t.end_ms = ParseInt(f[2], "end_ms");
    t.confused_form = NormalizePhrase(f[3]);
    if (f[4] != "0" && f[4] != "1")
      throw Error(ErrorCode::kParse, "script line " + std::to_string(line_no) +
                                         ": is_new_word must be 0 or 1");
    t.is_new_word = f[4] == "1";
    script.tokens.push_back(std::move(t));
  }
  script.Validate();
  return script;
}

Script ReadScript(const std::string& path) {
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (auto dot = name.find('.'); dot != std::string::npos)
    name = name.substr(0, dot);
  return ParseScript(ReadFile(path), name);
}

std::string FormatScript(const Script& script) {
  std::string out = "# ref_surface\tstart_ms\tend_ms\tconfused_form\tis_new_word\n";
  for (const auto& t : script.tokens) {
    out += t.ref_surface + '\t' + std::to_string(t.start_ms) + '\t' +
           std::to_string(t.end_ms) + '\t' + t.confused_form + '\t' +
           (t.is_new_word ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<RefSegment> ParseSegments(std::string_view text) {
  std::vector<RefSegment> out;
  for (const auto& line : SplitLines(text)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = SplitTabs(line);
    if (f.size() != 2)
      throw Error(ErrorCode::kParse, "segment line needs start and end");
    RefSegment seg{ParseInt(f[0], "segment start"),
                   ParseInt(f[1], "segment end")};
    if (seg.start_ms >= seg.end_ms)
      throw Error(ErrorCode::kParse, "segment start must precede end");
    out.push_back(seg);
  }
  return out;
}

std::vector<RefSegment> ReadSegments(const std::string& path) {
  return ParseSegments(ReadFile(path));
}

std::string FormatSegments(const std::vector<RefSegment>& segments) {
  std::string out;
  for (const auto& s : segments)
    out += std::to_string(s.start_ms) + '\t' + std::to_string(s.end_ms) + '\n';
  return out;
}

uint64_t ChunkDivergenceSeed(std::span<const ScriptToken> slice,
                             std::size_t source_offset) {
  // FNV-1a over the chunk's extent.
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  mix(source_offset);
  mix(slice.size());
  if (!slice.empty()) {
    mix(static_cast<uint64_t>(slice.front().start_ms));
    mix(static_cast<uint64_t>(slice.back().end_ms));
  }
  return h;
}

HypothesisBeam RecognizeChunk(std::span<const ScriptToken> slice,
                              std::size_t n_best, uint64_t divergence_seed,
                              std::size_t max_divergence,
                              std::size_t source_offset) {
  HypothesisBeam beam;
  if (slice.empty() || n_best == 0) return beam;

  std::vector<BeamToken> top;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const ScriptToken& t = slice[i];
    const auto words = SplitWhitespace(t.confused_form);
    const int64_t span = t.end_ms - t.start_ms;
    const auto n = static_cast<int64_t>(words.size());
    for (int64_t w = 0; w < n; ++w) {
      top.push_back({words[static_cast<std::size_t>(w)],
                     t.start_ms + span * w / n,
                     t.start_ms + span * (w + 1) / n, source_offset + i});
    }
  }

  std::mt19937_64 rng(divergence_seed);
  const std::size_t k_cap = std::min(max_divergence, top.size());
  beam.beams.reserve(n_best);
  beam.beams.push_back(top);
  for (std::size_t b = 1; b < n_best; ++b) {
    const std::size_t k = static_cast<std::size_t>(rng() % (k_cap + 1));
    std::vector<BeamToken> alt = top;
    for (std::size_t j = alt.size() - k; j < alt.size(); ++j)
      alt[j].text.append(b, 'x');
    beam.beams.push_back(std::move(alt));
  }
  return beam;
}

}  // namespace membooth

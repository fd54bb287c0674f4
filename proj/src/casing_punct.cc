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

#include "membooth/casing_punct.h"

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/text.h"

namespace membooth {

std::string CasedToken::Render() const {
  switch (trailing) {
    case Punct::kNone: return text;
    case Punct::kPeriod: return text + ".";
    case Punct::kComma: return text + ",";
    case Punct::kQuestion: return text + "?";
  }
  return text;
}

CasingLexicon::CasingLexicon(const std::vector<std::string>& forms) {
  for (const auto& f : forms) {
    std::string cased = StripPunctuation(f);
    if (!cased.empty()) forms_.emplace(Lowercase(cased), cased);
  }
}

const std::string* CasingLexicon::Find(std::string_view normalized) const {
  auto it = forms_.find(std::string(normalized));
  return it == forms_.end() ? nullptr : &it->second;
}

CasingLexicon ReadCasingLexicon(const std::string& path) {
  std::vector<std::string> forms;
  for (const auto& line : SplitLines(ReadFile(path)))
    if (!line.empty() && line[0] != '#') forms.push_back(line);
  return CasingLexicon(forms);
}

std::string CapitalizeFirst(std::string_view word) {
  std::string out(word);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = out[0] - 'a' + 'A';
  return out;
}

std::vector<CasedToken> ApplyCasing(std::span<const DecodedToken> tokens,
                                    const MemorySnapshot& snapshot,
                                    const CasingLexicon& lexicon,
                                    bool sentence_initial) {
  std::vector<CasedToken> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const DecodedToken& t = tokens[i];
    CasedToken c;
    if (t.provenance.is_memory_hit()) {
      const MemoryEntry* entry = snapshot.Find(t.provenance.entry);
      if (entry == nullptr)
        throw Error(ErrorCode::kDanglingProvenance,
                    "token '" + t.text + "' refers to missing entry '" +
                        t.provenance.entry + "'");
      const auto words = SplitWhitespace(entry->surface);
      c.text = t.provenance.entry_word < words.size()
                   ? words[t.provenance.entry_word]
                   : t.text;
      c.source = CasedToken::Source::kMemory;
    } else {
      const std::string* fixed = lexicon.Find(t.text);
      c.text = fixed ? *fixed : t.text;
      if (i == 0 && sentence_initial) c.text = CapitalizeFirst(c.text);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CasedToken> Punctuate(std::vector<CasedToken> tokens,
                                  std::span<const int64_t> gaps,
                                  int64_t pause_ms) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool last = i + 1 == tokens.size();
    const bool pause = !last && i < gaps.size() && gaps[i] >= pause_ms;
    if (!(last || pause)) continue;
    tokens[i].trailing = Punct::kPeriod;
    if (!last && tokens[i + 1].source == CasedToken::Source::kRule)
      tokens[i + 1].text = CapitalizeFirst(tokens[i + 1].text);
  }
  return tokens;
}

}  // namespace membooth

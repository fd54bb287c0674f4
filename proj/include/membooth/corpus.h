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

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "membooth/casing_punct.h"
#include "membooth/sim_recognizer.h"
#include "membooth/vocab_extract.h"

namespace membooth {

struct CorpusScript {
  std::string name;
  Script script;
  std::vector<RefSegment> segments;
  std::optional<std::string> paper_text;
  std::optional<SlideSchedule> slides;

  /// Reference words joined by spaces, with their casing.
  std::string TranscriptText() const;
};

/// On-disk layout:
///   train.vocab            training vocabulary, one word per line
///   aliases.memory         optional memory list with authored aliases
///   casing.lexicon         optional always-cased words
///   scripts/NAME.script    token script
///   scripts/NAME.segments  reference segments
///   scripts/NAME.paper.txt optional supporting paper text
///   scripts/NAME.slides    optional slide schedule
struct Corpus {
  std::string root;
  TrainingVocabulary vocab;
  std::vector<CorpusScript> scripts;
  /// Normalized word -> authored confused forms.
  std::unordered_map<std::string, std::vector<std::string>> aliases;
  CasingLexicon lexicon;

  const CorpusScript* Find(const std::string& name) const;
};

/// Throws Error(kMissingCorpusInput) when the vocabulary or a script's
/// segments file is absent.
Corpus LoadCorpus(const std::string& root);

/// Loads a single script outside any corpus directory.
CorpusScript LoadCorpusScript(const std::string& script_path,
                              const std::string& segments_path);

}  // namespace membooth

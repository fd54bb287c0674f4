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

#include "json.hpp"
#include "membooth/corpus.h"
#include "membooth/memory_decoder.h"
#include "membooth/memory_store.h"

namespace membooth {

/// Applies `edits` random single-letter edits (substitute, insert, delete)
/// to a normalized word. Seeded; never returns the input unchanged.
std::string CorruptWord(std::string_view word, uint64_t seed, int edits = 1);

struct SynthOptions {
  uint64_t seed = 11;
  std::size_t lectures = 11;           // scripts besides rehm_long
  std::size_t words_per_script = 1100;
  std::size_t stems = 1000;
  std::size_t new_words_per_lecture = 4;
  int planted_repeats = 5;
  double theta = kDefaultTheta;
};

struct SynthScript {
  CorpusScript corpus;
  std::vector<std::string> new_words;  // surfaces, first-occurrence order
  std::string planted;      // common word placed to collide with a new word
  std::string planted_for;  // normalized new word it collides with
};

struct SynthCorpus {
  std::vector<std::string> vocab;  // sorted
  std::vector<MemoryEntry> aliases;
  std::vector<std::string> lexicon;
  std::vector<SynthScript> scripts;
  std::vector<std::string> hard_words;  // confusion below theta; alias only
  uint64_t seed = 0;

  nlohmann::json Manifest() const;
};

SynthCorpus GenerateCorpus(const SynthOptions& options);

/// Throws Error(kConfig) naming the first violated property.
void VerifyCorpus(const SynthCorpus& corpus, double theta);

/// Writes the layout LoadCorpus reads, plus manifest.json.
void WriteCorpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace membooth

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

#include "membooth/corpus.h"

#include <algorithm>
#include <filesystem>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/memory_store.h"
#include "membooth/text.h"

namespace fs = std::filesystem;

namespace membooth {

std::string CorpusScript::TranscriptText() const {
  std::string out;
  for (const auto& t : script.tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.ref_surface;
  }
  return out;
}

const CorpusScript* Corpus::Find(const std::string& name) const {
  for (const auto& s : scripts)
    if (s.name == name) return &s;
  return nullptr;
}

CorpusScript LoadCorpusScript(const std::string& script_path,
                              const std::string& segments_path) {
  if (!FileExists(script_path))
    throw Error(ErrorCode::kMissingCorpusInput, "script " + script_path);
  if (!FileExists(segments_path))
    throw Error(ErrorCode::kMissingCorpusInput, "segments " + segments_path);
  CorpusScript cs;
  cs.script = ReadScript(script_path);
  cs.name = cs.script.name;
  cs.segments = ReadSegments(segments_path);
  return cs;
}

Corpus LoadCorpus(const std::string& root) {
  Corpus corpus;
  corpus.root = root;
  const fs::path base(root);
  const std::string vocab_path = (base / "train.vocab").string();
  if (!FileExists(vocab_path))
    throw Error(ErrorCode::kMissingCorpusInput, "training vocabulary " + vocab_path);
  corpus.vocab = ReadVocabulary(vocab_path);

  const std::string alias_path = (base / "aliases.memory").string();
  if (FileExists(alias_path)) {
    for (auto& e : ReadMemoryList(alias_path))
      corpus.aliases[e.normalized] = std::move(e.aliases);
  }
  const std::string lexicon_path = (base / "casing.lexicon").string();
  if (FileExists(lexicon_path)) corpus.lexicon = ReadCasingLexicon(lexicon_path);

  const fs::path dir = base / "scripts";
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::kMissingCorpusInput, "script directory " + dir.string());
  std::vector<fs::path> script_files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".script") script_files.push_back(entry.path());
  std::sort(script_files.begin(), script_files.end());

  for (const auto& path : script_files) {
    const std::string stem = path.stem().string();
    CorpusScript cs = LoadCorpusScript(path.string(),
                                       (dir / (stem + ".segments")).string());
    const fs::path paper = dir / (stem + ".paper.txt");
    if (FileExists(paper.string())) cs.paper_text = ReadFile(paper.string());
    const fs::path slides = dir / (stem + ".slides");
    if (FileExists(slides.string())) cs.slides = ReadSlideSchedule(slides.string());
    corpus.scripts.push_back(std::move(cs));
  }
  return corpus;
}

}  // namespace membooth

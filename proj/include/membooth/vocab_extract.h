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
#include <unordered_set>
#include <vector>

namespace membooth {

/// Normalized word forms the recognizer saw during training.
class TrainingVocabulary {
 public:
  TrainingVocabulary() = default;
  /// Every word is normalized; words that normalize to nothing are skipped.
  explicit TrainingVocabulary(const std::vector<std::string>& words);

  bool Contains(std::string_view normalized) const {
    return words_.count(std::string(normalized)) > 0;
  }
  void Insert(std::string_view raw);
  std::size_t size() const { return words_.size(); }
  /// Sorted, for deterministic sampling.
  std::vector<std::string> SortedWords() const;

 private:
  std::unordered_set<std::string> words_;
};

TrainingVocabulary ReadVocabulary(const std::string& path);

/// Words of `document_text` that are not in `vocab`, first-seen casing,
/// first-occurrence order, deduplicated by normalized form. A word must
/// contain a letter and be at least two code points long.
std::vector<std::string> ExtractNewWords(std::string_view document_text,
                                         const TrainingVocabulary& vocab);

struct Slide {
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::string text;
};

/// Time-ordered, non-overlapping slides inside [0, talk_end_ms].
struct SlideSchedule {
  std::vector<Slide> slides;
  int64_t talk_end_ms = 0;

  /// Throws Error(kParse) describing the first violated invariant.
  void Validate() const;
  std::string AllText() const;
};

/// Text of the slide shown at `now_ms` (or the most recent one between
/// slides; the first one before any slide starts) together with its
/// immediate neighbours. Throws Error(kOutOfRange) outside the talk.
std::string WindowSlides(const SlideSchedule& schedule, int64_t now_ms);

/// Index of the slide that `WindowSlides` centers on, or -1 if empty.
int CurrentSlideIndex(const SlideSchedule& schedule, int64_t now_ms);

/// First line `talk_end_ms`, then `start_ms<TAB>end_ms<TAB>path` per slide;
/// relative paths resolve against the schedule file's directory.
SlideSchedule ReadSlideSchedule(const std::string& path);

}  // namespace membooth

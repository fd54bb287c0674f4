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

#include "membooth/vocab_extract.h"

#include <algorithm>
#include <filesystem>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/text.h"

namespace membooth {

TrainingVocabulary::TrainingVocabulary(const std::vector<std::string>& words) {
  for (const auto& w : words) Insert(w);
}

void TrainingVocabulary::Insert(std::string_view raw) {
  std::string norm = NormalizeToken(raw);
  if (!norm.empty()) words_.insert(std::move(norm));
}

std::vector<std::string> TrainingVocabulary::SortedWords() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

TrainingVocabulary ReadVocabulary(const std::string& path) {
  TrainingVocabulary vocab;
  for (const auto& line : SplitLines(ReadFile(path))) {
    if (line.empty() || line[0] == '#') continue;
    vocab.Insert(line);
  }
  return vocab;
}

std::vector<std::string> ExtractNewWords(std::string_view document_text,
                                         const TrainingVocabulary& vocab) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : SplitWhitespace(document_text)) {
    std::string surface = StripPunctuation(raw);
    std::string norm = Lowercase(surface);
    if (norm.empty() || !ContainsLetter(norm) || CodePointCount(norm) < 2)
      continue;
    if (vocab.Contains(norm) || !seen.insert(norm).second) continue;
    out.push_back(std::move(surface));
  }
  return out;
}

void SlideSchedule::Validate() const {
  int64_t prev_end = 0;
  for (std::size_t i = 0; i < slides.size(); ++i) {
    const Slide& s = slides[i];
    const std::string where = "slide " + std::to_string(i + 1);
    if (s.start_ms >= s.end_ms)
      throw Error(ErrorCode::kParse, where + ": start must precede end");
    if (s.start_ms < prev_end)
      throw Error(ErrorCode::kParse, where + ": overlaps or is out of order");
    if (s.end_ms > talk_end_ms)
      throw Error(ErrorCode::kParse, where + ": ends after talk_end_ms");
    prev_end = s.end_ms;
  }
}

std::string SlideSchedule::AllText() const {
  std::string out;
  for (const auto& s : slides) {
    if (!out.empty()) out.push_back('\n');
    out += s.text;
  }
  return out;
}

int CurrentSlideIndex(const SlideSchedule& schedule, int64_t now_ms) {
  if (schedule.slides.empty()) return -1;
  int current = 0;
  for (std::size_t i = 0; i < schedule.slides.size(); ++i) {
    if (schedule.slides[i].start_ms <= now_ms) current = static_cast<int>(i);
  }
  return current;
}

std::string WindowSlides(const SlideSchedule& schedule, int64_t now_ms) {
  if (now_ms < 0 || now_ms > schedule.talk_end_ms)
    throw Error(ErrorCode::kOutOfRange,
                "time " + std::to_string(now_ms) + " outside [0, " +
                    std::to_string(schedule.talk_end_ms) + "]");
  const int current = CurrentSlideIndex(schedule, now_ms);
  if (current < 0) return {};
  const int last = static_cast<int>(schedule.slides.size()) - 1;
  std::string out;
  for (int i = std::max(0, current - 1); i <= std::min(last, current + 1);
       ++i) {
    if (!out.empty()) out.push_back('\n');
    out += schedule.slides[static_cast<std::size_t>(i)].text;
  }
  return out;
}

SlideSchedule ReadSlideSchedule(const std::string& path) {
  const auto lines = SplitLines(ReadFile(path));
  const auto base = std::filesystem::path(path).parent_path();
  SlideSchedule schedule;
  bool have_header = false;
  for (const auto& line : lines) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      schedule.talk_end_ms = ParseInt(line, "talk_end_ms");
      have_header = true;
      continue;
    }
    const auto fields = SplitTabs(line);
    if (fields.size() != 3)
      throw Error(ErrorCode::kParse, path + ": slide line needs 3 fields");
    Slide slide;
    slide.start_ms = ParseInt(fields[0], "slide start_ms");
    slide.end_ms = ParseInt(fields[1], "slide end_ms");
    std::filesystem::path text_path(fields[2]);
    if (text_path.is_relative()) text_path = base / text_path;
    slide.text = ReadFile(text_path.string());
    schedule.slides.push_back(std::move(slide));
  }
  if (!have_header)
    throw Error(ErrorCode::kParse, path + ": missing talk_end_ms header");
  schedule.Validate();
  return schedule;
}

}  // namespace membooth

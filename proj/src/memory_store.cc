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

#include "membooth/memory_store.h"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/text.h"

namespace membooth {

MemorySnapshot::MemorySnapshot(std::vector<MemoryEntry> entries,
                               uint64_t version)
    : entries_(std::move(entries)), version_(version) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i)
    index_.emplace(entries_[i].normalized, i);
}

const MemoryEntry* MemorySnapshot::Find(std::string_view normalized) const {
  auto it = index_.find(std::string(normalized));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::string MemorySnapshot::Serialize() const {
  return "#version " + std::to_string(version_) + "\n" +
         FormatMemoryList(entries_);
}

std::vector<std::string> CleanAliases(const std::vector<std::string>& aliases,
                                      std::string_view normalized) {
  std::vector<std::string> out;
  for (const auto& raw : aliases) {
    std::string alias = NormalizePhrase(raw);
    if (alias.empty() || alias == normalized) continue;
    if (std::find(out.begin(), out.end(), alias) != out.end()) continue;
    out.push_back(std::move(alias));
  }
  return out;
}

MemoryEntry MemoryStore::AddEntry(std::string_view surface,
                                  const std::vector<std::string>& aliases,
                                  bool extended, int64_t now_ms) {
  std::string normalized = NormalizePhrase(surface);
  if (normalized.empty())
    throw Error(ErrorCode::kEmptySurface,
                "memory entry '" + std::string(surface) + "' has no words");
  const auto words = SplitWhitespace(normalized);
  if (words.size() > kMaxPhraseWords)
    throw Error(ErrorCode::kPhraseTooLong,
                "memory entry '" + std::string(surface) + "' has " +
                    std::to_string(words.size()) + " words");
  // Surface keeps casing but loses outer punctuation per word.
  std::vector<std::string> surface_words;
  for (const auto& w : SplitWhitespace(surface)) {
    std::string s = StripPunctuation(w);
    if (!s.empty()) surface_words.push_back(std::move(s));
  }

  std::unique_lock lock(mu_);
  auto it = index_.find(normalized);
  if (it != index_.end()) {
    MemoryEntry& entry = entries_[it->second];
    for (auto& alias : CleanAliases(aliases, normalized)) {
      if (std::find(entry.aliases.begin(), entry.aliases.end(), alias) ==
          entry.aliases.end())
        entry.aliases.push_back(std::move(alias));
    }
    entry.extended = entry.extended || extended;
    ++version_;
    cached_.reset();
    return entry;
  }
  MemoryEntry entry;
  entry.surface = Join(surface_words, " ");
  entry.aliases = CleanAliases(aliases, normalized);
  entry.normalized = std::move(normalized);
  entry.extended = extended;
  entry.added_at_ms = now_ms;
  index_.emplace(entry.normalized, entries_.size());
  entries_.push_back(entry);
  ++version_;
  cached_.reset();
  return entry;
}

bool MemoryStore::RemoveEntry(std::string_view normalized) {
  const std::string key = NormalizePhrase(normalized);
  std::unique_lock lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return false;
  const std::size_t pos = it->second;
  index_.erase(it);
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(pos));
  for (std::size_t i = pos; i < entries_.size(); ++i)
    index_[entries_[i].normalized] = i;
  ++version_;
  cached_.reset();
  return true;
}

std::shared_ptr<const MemorySnapshot> MemoryStore::Snapshot() const {
  {
    std::shared_lock lock(mu_);
    if (cached_) return cached_;
  }
  std::unique_lock lock(mu_);
  if (!cached_)
    cached_ = std::make_shared<const MemorySnapshot>(entries_, version_);
  return cached_;
}

uint64_t MemoryStore::version() const {
  std::shared_lock lock(mu_);
  return version_;
}

std::size_t MemoryStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

bool MemoryStore::Contains(std::string_view normalized) const {
  const std::string key = NormalizePhrase(normalized);
  std::shared_lock lock(mu_);
  return index_.count(key) > 0;
}

std::vector<MemoryEntry> ParseMemoryList(std::string_view text) {
  std::vector<MemoryEntry> out;
  std::size_t line_no = 0;
  for (const auto& line : SplitLines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitTabs(line);
    MemoryEntry entry;
    // Multi-word surfaces keep their inner spacing.
    std::vector<std::string> words;
    for (const auto& w : SplitWhitespace(fields[0])) {
      std::string s = StripPunctuation(w);
      if (!s.empty()) words.push_back(std::move(s));
    }
    entry.surface = Join(words, " ");
    entry.normalized = NormalizePhrase(entry.surface);
    if (entry.normalized.empty())
      throw Error(ErrorCode::kParse,
                  "memory list line " + std::to_string(line_no) +
                      ": empty surface");
    if (fields.size() > 1 && !fields[1].empty()) {
      std::vector<std::string> raw;
      std::stringstream ss(fields[1]);
      std::string item;
      while (std::getline(ss, item, ',')) raw.push_back(item);
      entry.aliases = CleanAliases(raw, entry.normalized);
    }
    if (fields.size() > 2) {
      if (fields[2] == "extended:true") {
        entry.extended = true;
      } else if (fields[2] != "extended:false") {
        throw Error(ErrorCode::kParse, "memory list line " +
                                           std::to_string(line_no) +
                                           ": bad extended field '" +
                                           fields[2] + "'");
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<MemoryEntry> ReadMemoryList(const std::string& path) {
  return ParseMemoryList(ReadFile(path));
}

std::string FormatMemoryList(const std::vector<MemoryEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.surface;
    out += '\t';
    out += Join(e.aliases, ",");
    out += e.extended ? "\textended:true\n" : "\textended:false\n";
  }
  return out;
}

void WriteMemoryList(const std::string& path,
                     const std::vector<MemoryEntry>& entries) {
  WriteFile(path, FormatMemoryList(entries));
}

}  // namespace membooth

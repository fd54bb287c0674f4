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
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace membooth {

/// Longest phrase a memory entry may hold, in words.
inline constexpr std::size_t kMaxPhraseWords = 4;

struct MemoryEntry {
  std::string surface;     // cased, as the operator or document wrote it
  std::string normalized;  // NormalizePhrase(surface); the key
  std::vector<std::string> aliases;  // normalized confused forms
  bool extended = false;   // common word kept only to out-compete new words
  int64_t added_at_ms = 0;

  bool operator==(const MemoryEntry&) const = default;
};

/// Immutable view of the store at one version. Decoding only ever reads
/// snapshots, so mutations during a chunk take effect on the next chunk.
class MemorySnapshot {
 public:
  MemorySnapshot() = default;
  MemorySnapshot(std::vector<MemoryEntry> entries, uint64_t version);

  const std::vector<MemoryEntry>& entries() const { return entries_; }
  uint64_t version() const { return version_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const MemoryEntry* Find(std::string_view normalized) const;

  /// Memory list file text (see WriteMemoryList) preceded by a version line.
  std::string Serialize() const;

 private:
  std::vector<MemoryEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  uint64_t version_ = 0;
};

/// Word/phrase memory that can be edited while a session is running.
/// Single writer, any number of snapshot readers.
class MemoryStore {
 public:
  MemoryStore() = default;
  MemoryStore(const MemoryStore&) = delete;
  MemoryStore& operator=(const MemoryStore&) = delete;

  /// Adds `surface` or merges into the entry with the same normalized form
  /// (aliases are unioned, `extended` is OR-ed). Throws kEmptySurface when
  /// normalization leaves nothing, kPhraseTooLong above kMaxPhraseWords.
  MemoryEntry AddEntry(std::string_view surface,
                       const std::vector<std::string>& aliases = {},
                       bool extended = false, int64_t now_ms = 0);

  /// Returns whether an entry was removed. `normalized` is normalized again
  /// before lookup.
  bool RemoveEntry(std::string_view normalized);

  std::shared_ptr<const MemorySnapshot> Snapshot() const;

  uint64_t version() const;
  std::size_t size() const;
  bool Contains(std::string_view normalized) const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<MemoryEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  uint64_t version_ = 0;
  mutable std::shared_ptr<const MemorySnapshot> cached_;
};

/// One line per entry: `surface[TAB]alias1,alias2[TAB]extended:true|false`.
/// The last two fields are optional; `#` starts a comment line.
std::vector<MemoryEntry> ParseMemoryList(std::string_view text);
std::vector<MemoryEntry> ReadMemoryList(const std::string& path);
std::string FormatMemoryList(const std::vector<MemoryEntry>& entries);
void WriteMemoryList(const std::string& path,
                     const std::vector<MemoryEntry>& entries);

/// Normalizes aliases for `normalized`: drops empties, duplicates and the
/// entry's own form.
std::vector<std::string> CleanAliases(const std::vector<std::string>& aliases,
                                      std::string_view normalized);

}  // namespace membooth

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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "membooth/memory_store.h"
#include "membooth/sim_recognizer.h"

namespace membooth {

inline constexpr double kDefaultTheta = 0.75;
/// Longest window of consecutive hypothesis words compared to the memory.
inline constexpr std::size_t kMaxWindowWords = 4;

/// Character edit distance over code points.
std::size_t Levenshtein(std::u32string_view a, std::u32string_view b);
std::u32string ToCodePoints(std::string_view utf8);

/// 1 - levenshtein(a, b) / max(|a|, |b|), 1 when both are empty.
double Similarity(std::string_view a, std::string_view b);

/// `score >= theta`, tolerant to rounding in the division above.
inline bool MeetsThreshold(double score, double theta) {
  return score + 1e-12 >= theta;
}

struct MemoryMatch {
  std::string entry_normalized;
  std::size_t begin = 0;  // top-beam word index, inclusive
  std::size_t end = 0;    // exclusive
  double score = 0.0;
  bool via_alias = false;
  bool suppressed_by_extended = false;
  std::string suppressor;  // extended entry that won, if suppressed

  std::size_t length() const { return end - begin; }
  bool operator==(const MemoryMatch&) const = default;
};

/// Compares hypothesis windows against one memory snapshot. Keeps a
/// per-window cache, so reuse one matcher for every chunk decoded against
/// the same snapshot.
class Matcher {
 public:
  /// Throws Error(kInvalidThreshold) unless 0 < theta <= 1.
  Matcher(std::shared_ptr<const MemorySnapshot> snapshot, double theta);
  ~Matcher();
  Matcher(Matcher&&) noexcept;
  Matcher& operator=(Matcher&&) noexcept;

  /// Candidates over every window of 1..kMaxWindowWords words, resolved
  /// greedily by (score desc, longer span, earlier start) into
  /// non-overlapping matches, sorted by start. Suppressed matches are kept
  /// and flagged.
  std::vector<MemoryMatch> Match(std::span<const BeamToken> top) const;

  const MemorySnapshot& snapshot() const { return *snapshot_; }
  const std::shared_ptr<const MemorySnapshot>& snapshot_ptr() const {
    return snapshot_;
  }
  double theta() const { return theta_; }

 private:
  struct Index;
  std::shared_ptr<const MemorySnapshot> snapshot_;
  double theta_;
  std::unique_ptr<Index> index_;
};

std::vector<MemoryMatch> MatchMemory(const HypothesisBeam& beam,
                                     const MemorySnapshot& snapshot,
                                     double theta);

struct Provenance {
  enum class Kind { kPlain, kMemoryHit };
  Kind kind = Kind::kPlain;
  std::string entry;  // normalized form of the matched entry
  bool via_alias = false;
  std::size_t entry_word = 0;  // which word of a multi-word entry

  bool is_memory_hit() const { return kind == Kind::kMemoryHit; }
  bool operator==(const Provenance&) const = default;
};

struct DecodedToken {
  std::string text;  // normalized
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::size_t source_begin = 0;  // script token range this word came from
  std::size_t source_end = 0;
  Provenance provenance;

  bool operator==(const DecodedToken&) const = default;
};

/// Replaces each unsuppressed match span by the entry's words. Timings of a
/// replaced span are split evenly over the entry's words. Throws
/// kOverlappingMatches or kDanglingProvenance on inconsistent input.
std::vector<DecodedToken> ApplyMatches(std::span<const BeamToken> top,
                                       std::span<const MemoryMatch> matches,
                                       const MemorySnapshot& snapshot);

}  // namespace membooth

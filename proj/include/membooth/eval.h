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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "membooth/sim_recognizer.h"

namespace membooth {

/// Split of a hypothesis word stream into one piece per reference segment.
struct SegmentAlignment {
  /// refs.size() + 1 offsets; piece s is [boundaries[s], boundaries[s+1]).
  std::vector<std::size_t> boundaries;
  std::size_t total_edit_distance = 0;
  std::vector<std::size_t> piece_distances;

  std::size_t pieces() const {
    return boundaries.empty() ? 0 : boundaries.size() - 1;
  }
};

/// Word-level Levenshtein distance.
std::size_t WordEditDistance(std::span<const std::string> a,
                             std::span<const std::string> b);

/// Segmentation of `hyp` minimizing the summed word edit distance against
/// `refs`; among optimal segmentations the lexicographically earliest
/// boundaries win. Runs in O(|hyp| * |words in refs|).
SegmentAlignment SegmentMwer(std::span<const std::string> hyp,
                             std::span<const std::vector<std::string>> refs);

/// Total edit distance over total reference words; throws kEmptyReference
/// when the references hold no words.
double Wer(const SegmentAlignment& alignment,
           std::span<const std::vector<std::string>> refs);

struct RefWord {
  std::string normalized;
  std::string cased;
};

struct HypWord {
  std::string normalized;
  std::string cased;
};

/// Reference words grouped by segment: a script token belongs to the
/// segment containing its start time.
std::vector<std::vector<RefWord>> ReferenceSegments(
    const Script& script, const std::vector<RefSegment>& segments);
std::vector<std::vector<std::string>> NormalizedWords(
    const std::vector<std::vector<RefWord>>& refs);

struct WordCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t casing_correct = 0;

  WordCounts& operator+=(const WordCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    casing_correct += o.casing_correct;
    return *this;
  }
  bool operator==(const WordCounts&) const = default;
};

enum class EvalSubset { kAllTranscriptNewWords, kIntersectedWithSource };
const char* EvalSubsetName(EvalSubset subset);

struct NewWordReport {
  std::map<std::string, WordCounts> per_word;
  WordCounts total;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double casing_accuracy = 1.0;
  bool vacuous = false;
  EvalSubset subset = EvalSubset::kAllTranscriptNewWords;

  /// Recomputes the ratios from `total`. Ratios whose denominator is zero
  /// are 0, except when nothing occurred and nothing was emitted: then
  /// every ratio is 1 and `vacuous` is set.
  void Finalize();
};

/// Segment-local occurrence matching: with c_ref reference and c_hyp
/// hypothesis occurrences of a word in one aligned piece, TP += min,
/// FN += c_ref - min, FP += c_hyp - min. Phrases count once per occurrence.
NewWordReport NewWordMetrics(
    const SegmentAlignment& alignment,
    const std::vector<std::vector<RefWord>>& refs,
    std::span<const HypWord> hyp, const std::set<std::string>& new_words,
    const std::optional<std::set<std::string>>& source_words = std::nullopt);

/// Sums counts over several reports (e.g. the scripts of one run).
NewWordReport MergeReports(std::span<const NewWordReport> reports);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t n = 0;
};

/// Per-metric mean and population standard deviation over runs.
std::map<std::string, MetricSummary> AggregateRuns(
    std::span<const std::map<std::string, double>> runs);

}  // namespace membooth

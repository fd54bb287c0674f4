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

#include "membooth/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "membooth/error.h"
#include "membooth/text.h"

namespace membooth {

std::size_t WordEditDistance(std::span<const std::string> a,
                             std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

SegmentAlignment SegmentMwer(std::span<const std::string> hyp,
                             std::span<const std::vector<std::string>> refs) {
  if (refs.empty())
    throw Error(ErrorCode::kEmptyReference, "no reference segments");
  // Any segmentation plus per-piece alignments is an alignment of hyp
  // against the concatenated references and vice versa, so the optimum is
  // the plain edit distance to the concatenation.
  std::vector<std::string_view> ref;
  std::vector<std::size_t> offset{0};
  for (const auto& seg : refs) {
    for (const auto& w : seg) ref.push_back(w);
    offset.push_back(ref.size());
  }
  const std::size_t H = hyp.size(), R = ref.size();
  const std::size_t W = R + 1;
  // suffix[i * W + p] = distance between hyp[i:] and ref[p:].
  std::vector<uint32_t> suffix((H + 1) * W);
  for (std::size_t p = 0; p <= R; ++p) suffix[H * W + p] = static_cast<uint32_t>(R - p);
  for (std::size_t i = H; i-- > 0;) {
    suffix[i * W + R] = static_cast<uint32_t>(H - i);
    for (std::size_t p = R; p-- > 0;) {
      const uint32_t sub = suffix[(i + 1) * W + p + 1] + (hyp[i] == ref[p] ? 0 : 1);
      const uint32_t del = suffix[(i + 1) * W + p] + 1;  // extra hyp word
      const uint32_t ins = suffix[i * W + p + 1] + 1;    // missing ref word
      suffix[i * W + p] = std::min({sub, del, ins});
    }
  }
  const std::size_t optimum = suffix[0];

  SegmentAlignment out;
  out.total_edit_distance = optimum;
  out.boundaries.push_back(0);
  std::size_t spent = 0;
  std::size_t start = 0;
  std::vector<std::size_t> prev, cur;
  for (std::size_t s = 0; s + 1 < refs.size(); ++s) {
    const auto& seg = refs[s];
    // dist[i] = distance between hyp[start:i] and seg, for i >= start.
    prev.assign(seg.size() + 1, 0);
    for (std::size_t k = 0; k <= seg.size(); ++k) prev[k] = k;
    std::size_t chosen = H, chosen_cost = 0;
    for (std::size_t i = start;; ++i) {
      const std::size_t piece = prev[seg.size()];
      if (spent + piece + suffix[i * W + offset[s + 1]] == optimum) {
        chosen = i;
        chosen_cost = piece;
        break;
      }
      if (i == H) break;
      cur.assign(seg.size() + 1, 0);
      cur[0] = prev[0] + 1;
      for (std::size_t k = 1; k <= seg.size(); ++k)
        cur[k] = std::min({prev[k - 1] + (hyp[i] == seg[k - 1] ? 0 : 1),
                           prev[k] + 1, cur[k - 1] + 1});
      std::swap(prev, cur);
    }
    out.boundaries.push_back(chosen);
    out.piece_distances.push_back(chosen_cost);
    spent += chosen_cost;
    start = chosen;
  }
  out.boundaries.push_back(H);
  out.piece_distances.push_back(optimum - spent);
  return out;
}

double Wer(const SegmentAlignment& alignment,
           std::span<const std::vector<std::string>> refs) {
  std::size_t words = 0;
  for (const auto& seg : refs) words += seg.size();
  if (words == 0)
    throw Error(ErrorCode::kEmptyReference, "reference has no words");
  return static_cast<double>(alignment.total_edit_distance) /
         static_cast<double>(words);
}

std::vector<std::vector<RefWord>> ReferenceSegments(
    const Script& script, const std::vector<RefSegment>& segments) {
  std::vector<std::vector<RefWord>> out(segments.size());
  for (const auto& t : script.tokens) {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (t.start_ms >= segments[s].start_ms && t.start_ms < segments[s].end_ms) {
        std::string cased = StripPunctuation(t.ref_surface);
        std::string norm = Lowercase(cased);
        if (!norm.empty()) out[s].push_back({std::move(norm), std::move(cased)});
        break;
      }
    }
  }
  return out;
}

std::vector<std::vector<std::string>> NormalizedWords(
    const std::vector<std::vector<RefWord>>& refs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(refs.size());
  for (const auto& seg : refs) {
    std::vector<std::string> words;
    words.reserve(seg.size());
    for (const auto& w : seg) words.push_back(w.normalized);
    out.push_back(std::move(words));
  }
  return out;
}

const char* EvalSubsetName(EvalSubset subset) {
  return subset == EvalSubset::kAllTranscriptNewWords
             ? "all_transcript_new_words"
             : "intersected_with_source";
}

void NewWordReport::Finalize() {
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  vacuous = total.tp + total.fp + total.fn == 0;
  if (vacuous) {
    recall = precision = f1 = casing_accuracy = 1.0;
    return;
  }
  recall = ratio(total.tp, total.tp + total.fn);
  precision = ratio(total.tp, total.tp + total.fp);
  f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                : 0.0;
  casing_accuracy =
      total.tp == 0 ? 1.0 : ratio(total.casing_correct, total.tp);
}

namespace {

// Start positions of non-overlapping occurrences of `phrase` in `words`.
template <typename Word>
std::vector<std::size_t> Occurrences(std::span<const Word> words,
                                     const std::vector<std::string>& phrase) {
  std::vector<std::size_t> out;
  if (phrase.empty()) return out;
  for (std::size_t i = 0; i + phrase.size() <= words.size();) {
    bool hit = true;
    for (std::size_t k = 0; k < phrase.size() && hit; ++k)
      hit = words[i + k].normalized == phrase[k];
    if (hit) {
      out.push_back(i);
      i += phrase.size();
    } else {
      ++i;
    }
  }
  return out;
}

template <typename Word>
std::string CasedAt(std::span<const Word> words, std::size_t at,
                    std::size_t len) {
  std::string out;
  for (std::size_t k = 0; k < len; ++k) {
    if (k) out.push_back(' ');
    out += words[at + k].cased;
  }
  return out;
}

}  // namespace

NewWordReport NewWordMetrics(
    const SegmentAlignment& alignment,
    const std::vector<std::vector<RefWord>>& refs,
    std::span<const HypWord> hyp, const std::set<std::string>& new_words,
    const std::optional<std::set<std::string>>& source_words) {
  if (alignment.pieces() != refs.size())
    throw Error(ErrorCode::kConfig,
                "alignment has " + std::to_string(alignment.pieces()) +
                    " pieces for " + std::to_string(refs.size()) + " segments");
  NewWordReport report;
  std::vector<std::string> evaluated;
  for (const auto& w : new_words) {
    if (source_words && !source_words->count(w)) continue;
    evaluated.push_back(w);
  }
  report.subset = source_words ? EvalSubset::kIntersectedWithSource
                               : EvalSubset::kAllTranscriptNewWords;
  for (const auto& w : evaluated) report.per_word[w];

  for (std::size_t s = 0; s < refs.size(); ++s) {
    const std::span<const RefWord> ref(refs[s]);
    const std::span<const HypWord> piece(
        hyp.data() + alignment.boundaries[s],
        alignment.boundaries[s + 1] - alignment.boundaries[s]);
    for (const auto& w : evaluated) {
      const auto phrase = SplitWhitespace(w);
      const auto in_ref = Occurrences(ref, phrase);
      const auto in_hyp = Occurrences(piece, phrase);
      if (in_ref.empty() && in_hyp.empty()) continue;
      WordCounts c;
      c.tp = std::min(in_ref.size(), in_hyp.size());
      c.fn = in_ref.size() - c.tp;
      c.fp = in_hyp.size() - c.tp;
      if (c.tp > 0) {
        const std::string want = CasedAt(ref, in_ref.front(), phrase.size());
        std::size_t right = 0;
        for (std::size_t at : in_hyp)
          if (CasedAt(piece, at, phrase.size()) == want) ++right;
        c.casing_correct = std::min(c.tp, right);
      }
      report.per_word[w] += c;
      report.total += c;
    }
  }
  report.Finalize();
  return report;
}

NewWordReport MergeReports(std::span<const NewWordReport> reports) {
  NewWordReport out;
  if (!reports.empty()) out.subset = reports.front().subset;
  for (const auto& r : reports) {
    for (const auto& [w, c] : r.per_word) out.per_word[w] += c;
    out.total += r.total;
  }
  out.Finalize();
  return out;
}

std::map<std::string, MetricSummary> AggregateRuns(
    std::span<const std::map<std::string, double>> runs) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& run : runs)
    for (const auto& [metric, v] : run) values[metric].push_back(v);
  std::map<std::string, MetricSummary> out;
  for (const auto& [metric, vs] : values) {
    MetricSummary s;
    s.n = vs.size();
    double sum = 0.0;
    for (double v : vs) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (double v : vs) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.n));
    out[metric] = s;
  }
  return out;
}

}  // namespace membooth

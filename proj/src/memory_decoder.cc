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

#include "membooth/memory_decoder.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "membooth/error.h"
#include "membooth/text.h"

namespace membooth {
namespace {

/// Edit distance capped at `limit + 1`; stops early once every cell of a
/// row exceeds the limit.
std::size_t BoundedLevenshtein(std::u32string_view a, std::u32string_view b,
                               std::size_t limit) {
  const std::size_t m = a.size(), n = b.size();
  if ((m > n ? m - n : n - m) > limit) return limit + 1;
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[n], limit + 1);
}

std::size_t MaxEdits(std::size_t longest, double theta) {
  return static_cast<std::size_t>(
      std::floor((1.0 - theta) * static_cast<double>(longest) + 1e-9));
}

uint64_t BigramKey(char32_t a, char32_t b) {
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint64_t>(b);
}

std::map<uint64_t, uint16_t> Bigrams(std::u32string_view s) {
  std::map<uint64_t, uint16_t> out;
  char32_t prev = 0x110000;  // start padding, outside Unicode
  for (char32_t c : s) {
    ++out[BigramKey(prev, c)];
    prev = c;
  }
  ++out[BigramKey(prev, 0x110001)];
  return out;
}

struct Candidate {
  bool found = false;
  std::size_t entry = 0;
  double score = 0.0;
  bool via_alias = false;
};

}  // namespace

std::u32string ToCodePoints(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    const auto b0 = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    }
    if (len > 1 && i + len <= utf8.size()) {
      for (std::size_t k = 1; k < len; ++k)
        cp = (cp << 6) | (static_cast<unsigned char>(utf8[i + k]) & 0x3F);
    } else {
      len = 1;
      cp = b0;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t Levenshtein(std::u32string_view a, std::u32string_view b) {
  return BoundedLevenshtein(a, b, std::max(a.size(), b.size()));
}

double Similarity(std::string_view a, std::string_view b) {
  const std::u32string ca = ToCodePoints(a), cb = ToCodePoints(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(Levenshtein(ca, cb)) /
                   static_cast<double>(longest);
}

// Bigram inverted index over one class of entries (regular or extended).
// A pair within `d` edits shares at least max(m, n) + 1 - 2d padded
// bigrams, which prunes almost every entry before the edit distance runs.
class FormIndex {
 public:
  void Add(std::size_t entry, const std::string& normalized,
           const std::vector<std::string>& aliases) {
    const std::size_t id = forms_.size();
    forms_.push_back({entry, ToCodePoints(normalized)});
    const std::u32string& cps = forms_.back().cps;
    if (by_length_.size() <= cps.size()) by_length_.resize(cps.size() + 1);
    by_length_[cps.size()].push_back(id);
    for (const auto& [key, count] : Bigrams(cps))
      postings_[key].push_back({static_cast<uint32_t>(id), count});
    for (const auto& alias : aliases) aliases_.emplace(alias, entry);
  }

  Candidate Best(const std::string& window, double theta) const {
    Candidate best;
    // Exact alias hits score 1 but lose ties against a direct match.
    if (auto it = aliases_.find(window); it != aliases_.end())
      best = {true, it->second, 1.0, true};

    const std::u32string w = ToCodePoints(window);
    const std::size_t m = w.size();
    if (m == 0) return best;
    const auto lo = static_cast<std::size_t>(
        std::ceil(theta * static_cast<double>(m) - 1e-9));
    const auto hi = static_cast<std::size_t>(
        std::floor(static_cast<double>(m) / theta + 1e-9));
    const std::size_t hi_clamped =
        by_length_.empty() ? 0 : std::min(hi, by_length_.size() - 1);

    auto consider = [&](std::size_t id) {
      const Form& f = forms_[id];
      const std::size_t longest = std::max(m, f.cps.size());
      const std::size_t limit = MaxEdits(longest, theta);
      const std::size_t d = BoundedLevenshtein(w, f.cps, limit);
      if (d > limit) return;
      const double score =
          1.0 - static_cast<double>(d) / static_cast<double>(longest);
      if (!MeetsThreshold(score, theta)) return;
      const bool better =
          !best.found || score > best.score + 1e-12 ||
          (std::abs(score - best.score) <= 1e-12 &&
           (best.via_alias || f.entry < best.entry));
      if (better) best = {true, f.entry, score, false};
    };

    bool needs_scan = false;
    for (std::size_t n = lo; n <= hi_clamped; ++n) {
      const std::size_t longest = std::max(m, n);
      if (longest + 1 <= 2 * MaxEdits(longest, theta)) needs_scan = true;
    }
    if (needs_scan) {
      for (std::size_t n = lo; n <= hi_clamped; ++n)
        for (std::size_t id : by_length_[n]) consider(id);
      return best;
    }

    std::vector<uint32_t>& shared = scratch_;
    shared.assign(forms_.size(), 0);
    std::vector<uint32_t> touched;
    for (const auto& [key, count] : Bigrams(w)) {
      auto it = postings_.find(key);
      if (it == postings_.end()) continue;
      for (const auto& [id, c] : it->second) {
        if (shared[id] == 0) touched.push_back(id);
        shared[id] += std::min<uint32_t>(count, c);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (uint32_t id : touched) {
      const std::size_t n = forms_[id].cps.size();
      if (n < lo || n > hi) continue;
      const std::size_t longest = std::max(m, n);
      if (shared[id] + 2 * MaxEdits(longest, theta) < longest + 1) continue;
      consider(id);
    }
    return best;
  }

  bool empty() const { return forms_.empty() && aliases_.empty(); }

 private:
  struct Form {
    std::size_t entry;
    std::u32string cps;
  };
  std::vector<Form> forms_;
  std::vector<std::vector<std::size_t>> by_length_;
  std::unordered_map<uint64_t, std::vector<std::pair<uint32_t, uint16_t>>>
      postings_;
  std::unordered_map<std::string, std::size_t> aliases_;
  mutable std::vector<uint32_t> scratch_;
};

struct Matcher::Index {
  FormIndex regular;
  FormIndex extended;
  mutable std::unordered_map<std::string, Candidate> regular_cache;
  mutable std::unordered_map<std::string, Candidate> extended_cache;
};

Matcher::Matcher(std::shared_ptr<const MemorySnapshot> snapshot, double theta)
    : snapshot_(std::move(snapshot)), theta_(theta),
      index_(std::make_unique<Index>()) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw Error(ErrorCode::kInvalidThreshold,
                "theta must lie in (0, 1], got " + std::to_string(theta));
  if (!snapshot_) snapshot_ = std::make_shared<const MemorySnapshot>();
  const auto& entries = snapshot_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    FormIndex& target = entries[i].extended ? index_->extended : index_->regular;
    target.Add(i, entries[i].normalized, entries[i].aliases);
  }
}

Matcher::~Matcher() = default;
Matcher::Matcher(Matcher&&) noexcept = default;
Matcher& Matcher::operator=(Matcher&&) noexcept = default;

std::vector<MemoryMatch> Matcher::Match(std::span<const BeamToken> top) const {
  std::vector<MemoryMatch> out;
  if (top.empty() || index_->regular.empty()) return out;

  auto lookup = [this](const FormIndex& idx,
                       std::unordered_map<std::string, Candidate>& cache,
                       const std::string& window) -> const Candidate& {
    auto it = cache.find(window);
    if (it != cache.end()) return it->second;
    return cache.emplace(window, idx.Best(window, theta_)).first->second;
  };

  struct Window {
    std::size_t begin, end;
    std::string text;
  };
  std::vector<Window> windows;
  for (std::size_t b = 0; b < top.size(); ++b) {
    std::string text;
    for (std::size_t e = b; e < top.size() && e - b < kMaxWindowWords; ++e) {
      if (e > b) text.push_back(' ');
      text += top[e].text;
      windows.push_back({b, e + 1, text});
    }
  }

  std::vector<MemoryMatch> candidates;
  for (const Window& w : windows) {
    const Candidate& c = lookup(index_->regular, index_->regular_cache, w.text);
    if (!c.found) continue;
    MemoryMatch m;
    m.entry_normalized = snapshot_->entries()[c.entry].normalized;
    m.begin = w.begin;
    m.end = w.end;
    m.score = c.score;
    m.via_alias = c.via_alias;
    candidates.push_back(std::move(m));
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MemoryMatch& a, const MemoryMatch& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.length() != b.length())
                       return a.length() > b.length();
                     return a.begin < b.begin;
                   });

  std::vector<bool> taken(top.size(), false);
  for (auto& c : candidates) {
    bool free = true;
    for (std::size_t i = c.begin; i < c.end && free; ++i) free = !taken[i];
    if (!free) continue;
    for (std::size_t i = c.begin; i < c.end; ++i) taken[i] = true;
    out.push_back(std::move(c));
  }

  if (!index_->extended.empty()) {
    for (auto& m : out) {
      for (const Window& w : windows) {
        if (w.end <= m.begin || w.begin >= m.end) continue;
        const Candidate& e =
            lookup(index_->extended, index_->extended_cache, w.text);
        if (e.found && e.score + 1e-12 >= m.score) {
          m.suppressed_by_extended = true;
          m.suppressor = snapshot_->entries()[e.entry].normalized;
          break;
        }
      }
    }
  }

  std::sort(out.begin(), out.end(),
            [](const MemoryMatch& a, const MemoryMatch& b) {
              return a.begin < b.begin;
            });
  return out;
}

std::vector<MemoryMatch> MatchMemory(const HypothesisBeam& beam,
                                     const MemorySnapshot& snapshot,
                                     double theta) {
  Matcher matcher(std::make_shared<const MemorySnapshot>(snapshot), theta);
  if (beam.empty()) return {};
  return matcher.Match(beam.top());
}

std::vector<DecodedToken> ApplyMatches(std::span<const BeamToken> top,
                                       std::span<const MemoryMatch> matches,
                                       const MemorySnapshot& snapshot) {
  std::vector<const MemoryMatch*> ordered;
  for (const auto& m : matches) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const MemoryMatch* a, const MemoryMatch* b) {
              return a->begin < b->begin;
            });
  std::size_t prev_end = 0;
  for (const MemoryMatch* m : ordered) {
    if (m->begin >= m->end || m->end > top.size())
      throw Error(ErrorCode::kOverlappingMatches,
                  "match span outside the hypothesis");
    if (m->begin < prev_end)
      throw Error(ErrorCode::kOverlappingMatches,
                  "matches overlap at word " + std::to_string(m->begin));
    prev_end = m->end;
  }

  std::vector<DecodedToken> out;
  std::size_t pos = 0;
  auto emit_plain = [&](std::size_t upto) {
    for (; pos < upto; ++pos) {
      const BeamToken& t = top[pos];
      out.push_back({t.text, t.start_ms, t.end_ms, t.source, t.source + 1, {}});
    }
  };
  for (const MemoryMatch* m : ordered) {
    if (m->suppressed_by_extended) continue;
    const MemoryEntry* entry = snapshot.Find(m->entry_normalized);
    if (entry == nullptr)
      throw Error(ErrorCode::kDanglingProvenance,
                  "match refers to '" + m->entry_normalized +
                      "' which is not in snapshot " +
                      std::to_string(snapshot.version()));
    emit_plain(m->begin);
    const auto words = SplitWhitespace(entry->normalized);
    const int64_t start = top[m->begin].start_ms;
    const int64_t span = top[m->end - 1].end_ms - start;
    const auto n = static_cast<int64_t>(words.size());
    for (int64_t w = 0; w < n; ++w) {
      DecodedToken t;
      t.text = words[static_cast<std::size_t>(w)];
      t.start_ms = start + span * w / n;
      t.end_ms = start + span * (w + 1) / n;
      t.source_begin = top[m->begin].source;
      t.source_end = top[m->end - 1].source + 1;
      t.provenance = {Provenance::Kind::kMemoryHit, entry->normalized,
                      m->via_alias, static_cast<std::size_t>(w)};
      out.push_back(std::move(t));
    }
    pos = m->end;
  }
  emit_plain(top.size());
  return out;
}

}  // namespace membooth

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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "membooth/error.h"
#include "membooth/memory_decoder.h"
#include "test_support.h"

using namespace membooth;
using membooth::testing::OracleLevenshtein;

namespace {

std::vector<BeamToken> Top(const std::vector<std::string>& words) {
  std::vector<BeamToken> out;
  int64_t t = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    out.push_back({words[i], t, t + 100, i});
    t += 120;
  }
  return out;
}

std::shared_ptr<const MemorySnapshot> Snap(std::vector<MemoryEntry> entries) {
  for (auto& e : entries)
    if (e.normalized.empty()) e.normalized = NormalizePhrase(e.surface);
  return std::make_shared<const MemorySnapshot>(std::move(entries), 1);
}

double OracleSimilarity(const std::string& a, const std::string& b) {
  const auto ca = ToCodePoints(a), cb = ToCodePoints(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  return 1.0 - double(OracleLevenshtein(ca, cb)) / double(longest);
}

struct OracleCandidate {
  bool found = false;
  std::size_t entry = 0;
  double score = 0;
  bool via_alias = false;
};

// Scores every entry of the requested kind against the window.
OracleCandidate OracleBest(const MemorySnapshot& snap, const std::string& window,
                           double theta, bool extended) {
  OracleCandidate best;
  const auto& es = snap.entries();
  for (std::size_t i = 0; i < es.size() && !best.found; ++i) {
    if (es[i].extended != extended) continue;
    for (const auto& a : es[i].aliases)
      if (a == window) {
        best = {true, i, 1.0, true};
        break;
      }
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (es[i].extended != extended) continue;
    const double s = OracleSimilarity(window, es[i].normalized);
    if (!MeetsThreshold(s, theta)) continue;
    if (!best.found || s > best.score + 1e-12 ||
        (std::abs(s - best.score) <= 1e-12 && best.via_alias))
      best = {true, i, s, false};
  }
  return best;
}

std::vector<MemoryMatch> OracleMatch(const MemorySnapshot& snap,
                                     const std::vector<BeamToken>& top,
                                     double theta) {
  struct W {
    std::size_t b, e;
    std::string text;
  };
  std::vector<W> windows;
  for (std::size_t b = 0; b < top.size(); ++b)
    for (std::size_t e = b + 1; e <= top.size() && e - b <= kMaxWindowWords; ++e) {
      std::string text;
      for (std::size_t i = b; i < e; ++i) text += (i > b ? " " : "") + top[i].text;
      windows.push_back({b, e, text});
    }
  bool any_regular = false;
  for (const auto& e : snap.entries()) any_regular = any_regular || !e.extended;
  if (!any_regular) return {};

  std::vector<MemoryMatch> cands;
  for (const auto& w : windows) {
    const auto c = OracleBest(snap, w.text, theta, false);
    if (!c.found) continue;
    MemoryMatch m;
    m.entry_normalized = snap.entries()[c.entry].normalized;
    m.begin = w.b;
    m.end = w.e;
    m.score = c.score;
    m.via_alias = c.via_alias;
    cands.push_back(m);
  }
  // Pick repeatedly the best remaining candidate that fits.
  std::vector<MemoryMatch> out;
  std::vector<bool> used(cands.size(), false), taken(top.size(), false);
  for (;;) {
    int pick = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (used[i]) continue;
      bool fits = true;
      for (std::size_t k = cands[i].begin; k < cands[i].end; ++k) fits = fits && !taken[k];
      if (!fits) continue;
      if (pick < 0) {
        pick = int(i);
        continue;
      }
      const auto& a = cands[i];
      const auto& b = cands[std::size_t(pick)];
      if (a.score > b.score ||
          (a.score == b.score && (a.length() > b.length() ||
                                  (a.length() == b.length() && a.begin < b.begin))))
        pick = int(i);
    }
    if (pick < 0) break;
    used[std::size_t(pick)] = true;
    auto m = cands[std::size_t(pick)];
    for (std::size_t k = m.begin; k < m.end; ++k) taken[k] = true;
    for (const auto& w : windows) {
      if (w.e <= m.begin || w.b >= m.end) continue;
      const auto e = OracleBest(snap, w.text, theta, true);
      if (e.found && e.score + 1e-12 >= m.score) {
        m.suppressed_by_extended = true;
        m.suppressor = snap.entries()[e.entry].normalized;
        break;
      }
    }
    out.push_back(m);
  }
  std::sort(out.begin(), out.end(),
            [](const MemoryMatch& a, const MemoryMatch& b) { return a.begin < b.begin; });
  return out;
}

std::string RandomWord(std::mt19937_64& rng, const std::string& alphabet, int max_len) {
  std::string w;
  const int n = 1 + int(rng() % unsigned(max_len));
  for (int i = 0; i < n; ++i) w.push_back(alphabet[rng() % alphabet.size()]);
  return w;
}

}  // namespace

TEST_SUITE("memory_decoder") {

TEST_CASE("similarity values") {
  CHECK(Similarity("weasly", "weesley") == doctest::Approx(5.0 / 7.0));
  CHECK(Similarity("work flows", "workflows") == doctest::Approx(0.9));
  CHECK(Similarity("kortana", "cortana") == doctest::Approx(6.0 / 7.0));
  CHECK(Similarity("kortana", "cortina") == doctest::Approx(5.0 / 7.0));
  CHECK(Similarity("", "") == 1.0);
  CHECK(Similarity("abc", "") == 0.0);
  CHECK(Similarity("\xC3\xA4rger", "arger") == doctest::Approx(0.8));
}

TEST_CASE("levenshtein agrees with the textbook recurrence") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto a = ToCodePoints(RandomWord(rng, "abcd", 9));
    const auto b = ToCodePoints(RandomWord(rng, "abcd", 9));
    REQUIRE(Levenshtein(a, b) == OracleLevenshtein(a, b));
  }
}

TEST_CASE("the weasly example") {
  const auto snap = Snap({{"Ron Weasly", "", {}, false, 0}});
  const Matcher m(snap, 0.75);
  const auto top = Top({"his", "name", "is", "ron", "weesley"});
  const auto got = m.Match(top);
  REQUIRE(got.size() == 1);
  CHECK(got[0].entry_normalized == "ron weasly");
  CHECK(got[0].begin == 3);
  CHECK(got[0].end == 5);
  CHECK(got[0].score == doctest::Approx(1.0 - 2.0 / 11.0));
  const auto dec = ApplyMatches(top, got, *snap);
  REQUIRE(dec.size() == 5);
  CHECK(dec[4].text == "weasly");
  CHECK(dec[3].provenance.is_memory_hit());
  CHECK(dec[4].provenance.entry_word == 1);
  CHECK_FALSE(dec[2].provenance.is_memory_hit());
  CHECK(Matcher(snap, 0.85).Match(top).empty());
}

TEST_CASE("spaced and joined forms") {
  const auto snap = Snap({{"workflows", "", {}, false, 0}});
  const auto top = Top({"our", "work", "flows", "run"});
  const auto got = Matcher(snap, 0.75).Match(top);
  REQUIRE(got.size() == 1);
  CHECK(got[0].begin == 1);
  CHECK(got[0].end == 3);
  const auto dec = ApplyMatches(top, got, *snap);
  REQUIRE(dec.size() == 3);
  CHECK(dec[1].text == "workflows");
  CHECK(dec[1].start_ms == top[1].start_ms);
  CHECK(dec[1].end_ms == top[2].end_ms);
  CHECK(dec[1].source_begin == 1);
  CHECK(dec[1].source_end == 3);
}

TEST_CASE("aliases match exactly and lose ties to direct matches") {
  const auto snap = Snap({{"MQM", "", {"m q m"}, false, 0},
                          {"Aljoscha", "", {"all yoshi"}, false, 0}});
  const auto got = Matcher(snap, 0.75).Match(Top({"the", "m", "q", "m", "all", "yoshi"}));
  REQUIRE(got.size() == 2);
  CHECK(got[0].via_alias);
  CHECK(got[0].entry_normalized == "mqm");
  CHECK(got[0].score == 1.0);
  CHECK(got[1].entry_normalized == "aljoscha");
  CHECK(Matcher(snap, 0.75).Match(Top({"m", "q", "n"})).empty());

  const auto tie = Snap({{"alpha", "", {"beta"}, false, 0}, {"beta", "", {}, false, 0}});
  const auto t = Matcher(tie, 0.75).Match(Top({"beta"}));
  REQUIRE(t.size() == 1);
  CHECK(t[0].entry_normalized == "beta");
  CHECK_FALSE(t[0].via_alias);
}

TEST_CASE("ties go to the earlier entry") {
  const auto snap = Snap({{"abcx", "", {}, false, 0}, {"abcy", "", {}, false, 0}});
  const auto got = Matcher(snap, 0.75).Match(Top({"abcz"}));
  REQUIRE(got.size() == 1);
  CHECK(got[0].entry_normalized == "abcx");
}

TEST_CASE("extended entries suppress weaker new-word matches") {
  const auto top = Top({"cortina", "d'ampezzo"});
  auto snap = Snap({{"Cortana", "", {}, false, 0}});
  auto got = Matcher(snap, 0.75).Match(top);
  REQUIRE(got.size() == 1);
  CHECK(got[0].score == doctest::Approx(6.0 / 7.0));
  CHECK_FALSE(got[0].suppressed_by_extended);

  snap = Snap({{"Cortana", "", {}, false, 0}, {"cortina", "", {}, true, 0}});
  got = Matcher(snap, 0.75).Match(top);
  REQUIRE(got.size() == 1);
  CHECK(got[0].suppressed_by_extended);
  CHECK(got[0].suppressor == "cortina");
  const auto dec = ApplyMatches(top, got, *snap);
  CHECK(dec[0].text == "cortina");
  CHECK_FALSE(dec[0].provenance.is_memory_hit());

  // An exact hit on the new word is not out-competed by a weaker extended.
  got = Matcher(snap, 0.75).Match(Top({"cortana"}));
  REQUIRE(got.size() == 1);
  CHECK_FALSE(got[0].suppressed_by_extended);
}

TEST_CASE("only extended entries means no matches") {
  const auto snap = Snap({{"the", "", {}, true, 0}});
  CHECK(Matcher(snap, 0.75).Match(Top({"the"})).empty());
}

TEST_CASE("threshold validation") {
  const auto snap = Snap({});
  CHECK_THROWS_AS(Matcher(snap, 0.0), Error);
  CHECK_THROWS_AS(Matcher(snap, 1.5), Error);
  CHECK_THROWS_AS(Matcher(snap, std::nan("")), Error);
  try {
    Matcher bad(snap, -1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidThreshold);
  }
  CHECK_NOTHROW(Matcher(snap, 1.0));
  CHECK(MatchMemory(HypothesisBeam{}, *snap, 0.75).empty());
}

TEST_CASE("apply rejects overlaps and dangling entries") {
  const auto snap = Snap({{"ab", "", {}, false, 0}});
  const auto top = Top({"ab", "ab", "ab"});
  std::vector<MemoryMatch> overlap = {{"ab", 0, 2, 1.0, false, false, ""},
                                      {"ab", 1, 3, 1.0, false, false, ""}};
  try {
    ApplyMatches(top, overlap, *snap);
    FAIL("expected OverlappingMatches");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOverlappingMatches);
  }
  std::vector<MemoryMatch> outside = {{"ab", 2, 4, 1.0, false, false, ""}};
  CHECK_THROWS_AS(ApplyMatches(top, outside, *snap), Error);
  std::vector<MemoryMatch> dangling = {{"zz", 0, 1, 1.0, false, false, ""}};
  try {
    ApplyMatches(top, dangling, *snap);
    FAIL("expected DanglingProvenance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDanglingProvenance);
  }
}

TEST_CASE("matcher agrees with exhaustive scoring") {
  std::mt19937_64 rng(17);
  const double thetas[] = {0.5, 0.6, 0.75, 0.8, 0.9, 1.0};
  for (int trial = 0; trial < 600; ++trial) {
    std::vector<MemoryEntry> entries;
    const int n_entries = 1 + int(rng() % 6);
    for (int i = 0; i < n_entries; ++i) {
      MemoryEntry e;
      e.surface = RandomWord(rng, "abc", 5);
      if (rng() % 3 == 0) e.surface += " " + RandomWord(rng, "abc", 3);
      e.normalized = NormalizePhrase(e.surface);
      e.extended = rng() % 4 == 0;
      if (rng() % 3 == 0) e.aliases.push_back(RandomWord(rng, "abc", 2));
      bool dup = false;
      for (const auto& o : entries) dup = dup || o.normalized == e.normalized;
      if (!dup) entries.push_back(e);
    }
    const auto snap = Snap(entries);
    std::vector<std::string> words;
    const int len = int(rng() % 8);
    for (int i = 0; i < len; ++i) words.push_back(RandomWord(rng, "abc", 4));
    const auto top = Top(words);
    const double theta = thetas[rng() % 6];
    const auto got = Matcher(snap, theta).Match(top);
    const auto want = OracleMatch(*snap, top, theta);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].entry_normalized == want[i].entry_normalized);
      CHECK(got[i].begin == want[i].begin);
      CHECK(got[i].end == want[i].end);
      CHECK(got[i].score == doctest::Approx(want[i].score));
      CHECK(got[i].via_alias == want[i].via_alias);
      CHECK(got[i].suppressed_by_extended == want[i].suppressed_by_extended);
      CHECK(got[i].suppressor == want[i].suppressor);
    }
  }
}

TEST_CASE("indexed lookup over a large memory agrees with exhaustive scoring") {
  std::mt19937_64 rng(29);
  std::vector<MemoryEntry> entries;
  std::set<std::string> seen;
  while (entries.size() < 400) {
    MemoryEntry e;
    e.surface = RandomWord(rng, "abcdefgh", 10);
    if (e.surface.size() < 4 || !seen.insert(e.surface).second) continue;
    e.normalized = e.surface;
    entries.push_back(e);
  }
  const auto snap = Snap(entries);
  for (double theta : {0.7, 0.75, 0.85}) {
    const Matcher m(snap, theta);
    for (int i = 0; i < 60; ++i) {
      std::vector<std::string> words;
      for (int k = 0; k < 5; ++k) {
        std::string w = entries[rng() % entries.size()].normalized;
        if (rng() % 2) w[rng() % w.size()] = 'z';
        words.push_back(w);
      }
      const auto top = Top(words);
      const auto got = m.Match(top);
      const auto want = OracleMatch(*snap, top, theta);
      REQUIRE(got.size() == want.size());
      for (std::size_t j = 0; j < got.size(); ++j) {
        CHECK(got[j].entry_normalized == want[j].entry_normalized);
        CHECK(got[j].begin == want[j].begin);
      }
    }
  }
}

}

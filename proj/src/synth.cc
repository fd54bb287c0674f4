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

#include "membooth/synth.h"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "membooth/casing_punct.h"
#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/sim_recognizer.h"
#include "membooth/text.h"
#include "membooth/vocab_extract.h"

namespace fs = std::filesystem;

namespace membooth {

namespace {

constexpr const char* kFunctionWords[] = {
    "the",   "a",     "an",    "of",   "to",    "in",    "and",   "is",
    "that",  "it",    "for",   "on",   "with",  "as",    "we",    "this",
    "are",   "be",    "by",    "at",   "from",  "or",    "was",   "have",
    "not",   "but",   "can",   "which", "all",  "so",    "if",    "our",
    "they",  "one",   "more",  "there", "when", "what",  "these", "also",
    "how",   "will",  "has",   "its",  "into",  "than",  "then",  "some",
    "very",  "just",  "about", "like", "now",   "here",  "only",  "where",
    "would", "could", "their", "been", "each",  "you",   "he",    "his",
    "name",  "ron"};

constexpr const char* kAcronyms[] = {"EU", "USA", "IBM"};

struct NewWordSpec {
  const char* surface;
  const char* confusion;  // nullptr: corrupt the word
};

constexpr NewWordSpec kRehmWords[] = {
    {"pipelining", nullptr}, {"Friem", nullptr},
    {"iAnnotate", nullptr},  {"MQM", "m q m"},
    {"LSPs", nullptr},       {"eServices", nullptr},
    {"semantification", nullptr}, {"Aljoscha", "all yoshi"},
    {"Cortana", "kortana"},  {"workflows", "work flows"},
    {"DFKI", nullptr},       {"annotating", nullptr},
    {"NLP", "n l p"},
};
constexpr const char* kRehmPlanted = "cortina";

constexpr NewWordSpec kLectureWords[] = {
    {"Weasly", "weesley"},  {"Hogwarts", nullptr},   {"Dumbledore", nullptr},
    {"Gryffindor", nullptr}, {"Tesseract", nullptr}, {"Ljubljana", "lube liana"},
    {"Edinburgh", nullptr}, {"Bratislava", nullptr}, {"ELITR", nullptr},
    {"EMNLP", nullptr},     {"Karlsruhe", nullptr},  {"Waibel", nullptr},
    {"Huber", "hoover"},    {"Kubernetes", nullptr}, {"PyTorch", nullptr},
    {"TensorFlow", "tensor flow"}, {"Quidditch", nullptr}, {"Tbilisi", nullptr},
    {"Nvidia", nullptr},    {"Moodle", nullptr},     {"Zotero", nullptr},
    {"LaTeX", nullptr},     {"GitLab", nullptr},     {"Jupyter", nullptr},
    {"Postgres", nullptr},  {"Eurovision", nullptr}, {"Schwarzwald", "schwarz wald"},
    {"Riesling", nullptr},  {"Kafka", nullptr},      {"Dijkstra", "dike stra"},
    {"Hamiltonian", nullptr}, {"Wasserstein", nullptr}, {"Kullback", "cool back"},
    {"Leibler", nullptr},   {"Bayesian", nullptr},   {"Markovian", nullptr},
    {"diarization", nullptr}, {"lemmatizer", nullptr}, {"tokenizer", nullptr},
    {"Elasticsearch", "elastic search"}, {"Grafana", nullptr},
    {"Prometheus", nullptr}, {"Niedermayer", nullptr}, {"Vltava", nullptr},
};

constexpr const char* kPaperOnly[] = {
    "Europarl", "Transkribus", "Kaldi",   "Fairseq",  "Sockeye", "OpenNMT",
    "Hunspell", "Wikidata",    "Okapi",   "Sennrich", "Zenodo",  "Matecat",
    "Memsource", "Tatoeba",    "Moodbot", "Lingvist"};

constexpr const char* kOcrNoise[] = {"|", "l", "1.", "-", "~", "rn", "2", "ii"};

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                               "s", "t", "v", "z", "br", "dr", "gr", "kr", "pl",
                               "st", "tr", "sl", "fl"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
const char* const kCodas[] = {"", "", "", "n", "r", "l", "s", "m", "t", "k"};
const char* const kSuffixes[] = {"", "s", "ed", "er", "ing", "ness"};

constexpr int64_t kSentencePauseMs = 800;

template <typename T, std::size_t N>
const T& Pick(const T (&arr)[N], std::mt19937_64& rng) {
  return arr[rng() % N];
}

std::size_t Uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

enum class SlotKind { kFiller, kNew, kPlanted };

struct Slot {
  std::string surface;
  std::string confusion;  // normalized
  SlotKind kind = SlotKind::kFiller;
};

using Sentence = std::vector<Slot>;

struct WordPlan {
  std::string surface;
  std::string normalized;
  std::string confusion;
  bool hard = false;
};

// Letters of a normalized word, for the edit distance budget.
std::size_t Letters(std::string_view word) { return CodePointCount(word); }

class Builder {
 public:
  explicit Builder(const SynthOptions& options)
      : options_(options), rng_(options.seed) {}

  SynthCorpus Build() {
    SynthCorpus out;
    out.seed = options_.seed;
    CollectNewWords();
    MakeStems();
    for (const auto& w : kFunctionWords) vocab_.insert(w);
    for (const auto& w : kAcronyms) vocab_.insert(NormalizeToken(w));
    for (const auto& w : kAcronyms) out.lexicon.push_back(w);

    // Script plans: which new words go where.
    std::vector<std::pair<std::string, std::vector<NewWordSpec>>> plans;
    plans.push_back({"rehm_long", {std::begin(kRehmWords), std::end(kRehmWords)}});
    std::size_t next = 0;
    for (std::size_t i = 0; i < options_.lectures; ++i) {
      std::vector<NewWordSpec> words;
      for (std::size_t k = 0; k < options_.new_words_per_lecture &&
                              next < std::size(kLectureWords);
           ++k)
        words.push_back(kLectureWords[next++]);
      char name[32];
      std::snprintf(name, sizeof(name), "lecture%02zu", i + 1);
      plans.push_back({name, std::move(words)});
    }

    // Confusions first: planted words join the vocabulary, which the
    // filler check needs.
    std::vector<std::vector<WordPlan>> word_plans;
    std::vector<std::string> planted(plans.size());
    std::vector<std::string> planted_for(plans.size());
    for (std::size_t s = 0; s < plans.size(); ++s) {
      word_plans.push_back(PlanWords(plans[s].second));
      PlanPlanted(s == 0, word_plans.back(), &planted[s], &planted_for[s]);
      if (!planted[s].empty()) vocab_.insert(planted[s]);
    }
    for (std::size_t s = 0; s < plans.size(); ++s)
      out.scripts.push_back(BuildScript(plans[s].first, word_plans[s],
                                        planted[s], planted_for[s]));

    for (const auto& plan : word_plans)
      for (const auto& w : plan) {
        if (!w.hard) continue;
        MemoryEntry e;
        e.surface = w.surface;
        e.normalized = w.normalized;
        e.aliases = {w.confusion};
        out.aliases.push_back(std::move(e));
        out.hard_words.push_back(w.normalized);
      }
    out.vocab.assign(vocab_.begin(), vocab_.end());
    return out;
  }

 private:
  void CollectNewWords() {
    for (const auto& w : kRehmWords) all_new_.insert(NormalizeToken(w.surface));
    for (const auto& w : kLectureWords) all_new_.insert(NormalizeToken(w.surface));
    for (const auto& w : kPaperOnly) all_new_.insert(NormalizeToken(w));
  }

  bool CollidesWithNewWord(const std::string& word) const {
    if (all_new_.count(word)) return true;
    for (const auto& n : all_new_)
      if (MeetsThreshold(Similarity(word, n), options_.theta)) return true;
    return false;
  }

  void MakeStems() {
    std::set<std::string> seen;
    std::size_t guard = 0;
    while (stems_.size() < options_.stems) {
      if (++guard > options_.stems * 100)
        throw Error(ErrorCode::kConfig, "cannot draw enough distinct stems");
      std::string stem;
      const std::size_t syllables = Uniform(rng_, 2, 3);
      for (std::size_t i = 0; i < syllables; ++i) {
        stem += Pick(kOnsets, rng_);
        stem += Pick(kVowels, rng_);
        if (i + 1 == syllables || rng_() % 3 == 0) stem += Pick(kCodas, rng_);
      }
      if (stem.size() < 4 || stem.size() > 10) continue;
      bool ok = true;
      std::vector<std::string> forms;
      for (const char* suffix : kSuffixes) {
        std::string form = stem + suffix;
        if (seen.count(form) || CollidesWithNewWord(form)) {
          ok = false;
          break;
        }
        forms.push_back(std::move(form));
      }
      if (!ok) continue;
      for (auto& f : forms) {
        seen.insert(f);
        vocab_.insert(f);
      }
      stems_.push_back(stem);
    }
  }

  std::vector<WordPlan> PlanWords(const std::vector<NewWordSpec>& specs) {
    std::vector<WordPlan> out;
    for (const auto& spec : specs) {
      WordPlan w;
      w.surface = spec.surface;
      w.normalized = NormalizeToken(spec.surface);
      out.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      WordPlan& w = out[i];
      if (specs[i].confusion) {
        w.confusion = specs[i].confusion;
      } else {
        const int edits = Letters(w.normalized) >= 8 ? 2 : 1;
        for (uint64_t attempt = 0;; ++attempt) {
          if (attempt > 1000)
            throw Error(ErrorCode::kConfig, "no usable confusion for " + w.surface);
          std::string c = CorruptWord(w.normalized, rng_(), edits);
          if (vocab_.count(c) || all_new_.count(c)) continue;
          if (!MeetsThreshold(Similarity(c, w.normalized), options_.theta)) continue;
          bool clear = true;
          for (const auto& other : out)
            if (&other != &w &&
                Similarity(c, other.normalized) + 1e-12 >= options_.theta)
              clear = false;
          if (!clear) continue;
          w.confusion = std::move(c);
          break;
        }
      }
      w.hard = !MeetsThreshold(Similarity(w.confusion, w.normalized), options_.theta);
    }
    return out;
  }

  // Picks a soft, one-word confusion target and a common word within theta
  // of it that is still farther from the confusion than the word itself.
  void PlanPlanted(bool rehm, const std::vector<WordPlan>& words,
                   std::string* planted, std::string* planted_for) {
    if (rehm) {
      *planted = kRehmPlanted;
      *planted_for = "cortana";
      return;
    }
    for (const auto& w : words) {
      if (w.hard || w.confusion.find(' ') != std::string::npos ||
          Letters(w.normalized) < 6)
        continue;
      const double own = Similarity(w.normalized, w.confusion);
      for (int attempt = 0; attempt < 500; ++attempt) {
        std::string v = CorruptWord(w.normalized, rng_(), 1);
        if (v == w.confusion || vocab_.count(v) || all_new_.count(v)) continue;
        if (!MeetsThreshold(Similarity(v, w.normalized), options_.theta)) continue;
        if (Similarity(v, w.confusion) >= own) continue;
        bool clear = true;
        for (const auto& other : words)
          if (&other != &w &&
              MeetsThreshold(Similarity(v, other.normalized), options_.theta))
            clear = false;
        if (!clear) continue;
        *planted = std::move(v);
        *planted_for = w.normalized;
        return;
      }
    }
  }

  Slot FillerWord(const std::vector<std::string>& topic, const std::string& planted) {
    for (;;) {
      if (rng_() % 100 < 45) {
        const std::string w = Pick(kFunctionWords, rng_);
        if (w == "name" || w == "ron") continue;
        return {w, w, SlotKind::kFiller};
      }
      if (rng_() % 200 == 0) {
        const std::string w = Pick(kAcronyms, rng_);
        return {w, NormalizeToken(w), SlotKind::kFiller};
      }
      const double u = Unit(rng_);
      const std::size_t idx =
          std::min(topic.size() - 1, static_cast<std::size_t>(u * u * topic.size()));
      const std::size_t r = rng_() % 10;
      const char* suffix = r < 4 ? "" : kSuffixes[1 + (r - 4) % 5];
      std::string w = topic[idx] + suffix;
      if (w == planted) continue;
      return {w, w, SlotKind::kFiller};
    }
  }

  Sentence MakeSentence(const std::vector<std::string>& topic,
                        const std::string& planted) {
    Sentence s;
    const std::size_t len = Uniform(rng_, 7, 13);
    for (std::size_t i = 0; i < len; ++i) s.push_back(FillerWord(topic, planted));
    return s;
  }

  SynthScript BuildScript(const std::string& name, const std::vector<WordPlan>& words,
                          const std::string& planted, const std::string& planted_for) {
    std::vector<std::string> topic;
    {
      std::vector<std::string> pool = stems_;
      for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng_() % i]);
      topic.assign(pool.begin(), pool.begin() + std::min<std::size_t>(120, pool.size()));
    }
    std::vector<Sentence> sentences;
    std::size_t total = 0;
    while (total < options_.words_per_script) {
      sentences.push_back(MakeSentence(topic, planted));
      total += sentences.back().size();
    }
    const std::size_t n = sentences.size();
    std::vector<int> has_new(n, -1);

    auto put = [&](std::size_t si, const Slot& slot) {
      Sentence& s = sentences[si];
      const std::size_t pos = Uniform(rng_, 1, s.size() - 2);
      s[pos] = slot;
    };
    auto free_near = [&](std::size_t si, std::size_t radius) {
      for (std::size_t k = si >= radius ? si - radius : 0;
           k <= std::min(n - 1, si + radius); ++k)
        if (has_new[k] >= 0) return false;
      return true;
    };

    // First occurrences keep list order, spread over the first 60%.
    std::vector<std::size_t> first(words.size());
    const std::size_t span = n * 6 / 10;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::size_t si = 2 + (span * i) / words.size() + rng_() % 3;
      while (has_new[si] >= 0) ++si;
      first[i] = si;
      has_new[si] = static_cast<int>(i);
    }
    // Repeats.
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::size_t extra =
          words[i].normalized == planted_for ? 1 + rng_() % 3 : rng_() % 4;
      std::vector<std::size_t> mine{first[i]};
      for (std::size_t e = 0, guard = 0; e < extra && guard < 1000; ++guard) {
        const std::size_t si = Uniform(rng_, first[i] + 4, n - 2);
        if (si >= n - 1 || has_new[si] >= 0) continue;
        bool spaced = true;
        for (auto m : mine)
          if ((si > m ? si - m : m - si) < 4) spaced = false;
        if (!spaced) continue;
        has_new[si] = static_cast<int>(i);
        mine.push_back(si);
        ++e;
      }
    }
    for (std::size_t si = 0; si < n; ++si) {
      if (has_new[si] < 0) continue;
      const WordPlan& w = words[static_cast<std::size_t>(has_new[si])];
      put(si, {w.surface, w.confusion, SlotKind::kNew});
    }
    // Planted collisions: after the target's first occurrence, away from
    // any new word, spaced out so a correction lands in between.
    if (!planted.empty()) {
      std::size_t target = 0;
      for (std::size_t i = 0; i < words.size(); ++i)
        if (words[i].normalized == planted_for) target = first[i];
      std::vector<std::size_t> candidates;
      for (std::size_t si = target + 4; si + 1 < n; ++si)
        if (free_near(si, 1)) candidates.push_back(si);
      std::vector<std::size_t> chosen;
      for (std::size_t i = candidates.size(); i > 1; --i)
        std::swap(candidates[i - 1], candidates[rng_() % i]);
      for (auto si : candidates) {
        if (chosen.size() == static_cast<std::size_t>(options_.planted_repeats)) break;
        bool spaced = true;
        for (auto c : chosen)
          if ((si > c ? si - c : c - si) < 3) spaced = false;
        if (spaced) chosen.push_back(si);
      }
      for (auto si : chosen) put(si, {planted, planted, SlotKind::kPlanted});
    }

    SynthScript out;
    out.planted = planted;
    out.planted_for = planted_for;
    for (const auto& w : words) out.new_words.push_back(w.surface);
    CorpusScript& cs = out.corpus;
    cs.name = name;
    cs.script.name = name;
    int64_t t = 300;
    std::size_t sentence_in_segment = 0, segment_target = Uniform(rng_, 1, 2);
    RefSegment segment{-1, 0};
    for (std::size_t si = 0; si < n; ++si) {
      const Sentence& s = sentences[si];
      for (std::size_t k = 0; k < s.size(); ++k) {
        ScriptToken tok;
        tok.ref_surface = s[k].surface;
        if (k == 0 && s[k].kind == SlotKind::kFiller && !tok.ref_surface.empty() &&
            tok.ref_surface[0] >= 'a' && tok.ref_surface[0] <= 'z')
          tok.ref_surface[0] = static_cast<char>(tok.ref_surface[0] - 'a' + 'A');
        if (k + 1 == s.size()) tok.ref_surface += '.';
        tok.confused_form = s[k].confusion;
        tok.is_new_word = s[k].kind == SlotKind::kNew;
        tok.start_ms = t;
        tok.end_ms = t + 150 + 60 * static_cast<int64_t>(Letters(NormalizeToken(s[k].surface)));
        t = tok.end_ms + static_cast<int64_t>(Uniform(rng_, 30, 80));
        if (segment.start_ms < 0) segment.start_ms = tok.start_ms;
        segment.end_ms = tok.end_ms;
        cs.script.tokens.push_back(std::move(tok));
      }
      t += kSentencePauseMs;
      if (++sentence_in_segment == segment_target || si + 1 == n) {
        cs.segments.push_back(segment);
        segment = {-1, 0};
        sentence_in_segment = 0;
        segment_target = Uniform(rng_, 1, 2);
      }
    }

    cs.paper_text = MakePaper(words, topic, planted);
    cs.slides = MakeSlides(cs.script, topic, planted);
    return out;
  }

  std::string MakePaper(const std::vector<WordPlan>& words,
                        const std::vector<std::string>& topic,
                        const std::string& planted) {
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < words.size(); ++i)
      if (i % 4 != 3) terms.push_back(words[i].surface);
    for (int i = 0; i < 3; ++i) terms.push_back(Pick(kPaperOnly, rng_));
    std::string out;
    const std::size_t sentences = 24;
    for (std::size_t i = 0; i < sentences; ++i) {
      Sentence s = MakeSentence(topic, planted);
      if (!terms.empty() && i % 2 == 1) {
        s[1 + rng_() % (s.size() - 2)] = {terms[(i / 2) % terms.size()], "", SlotKind::kNew};
      }
      std::vector<std::string> text;
      for (const auto& slot : s) text.push_back(slot.surface);
      text.front() = CapitalizeFirst(text.front());
      out += Join(text, " ") + ".";
      out += (i % 6 == 5) ? "\n\n" : " ";
    }
    // Every kept term at least once.
    out += "\nKeywords: " + Join(terms, ", ") + ".\n";
    return out;
  }

  SlideSchedule MakeSlides(const Script& script, const std::vector<std::string>& topic,
                           const std::string& planted) {
    SlideSchedule deck;
    deck.talk_end_ms = script.duration_ms() + 500;
    const int64_t count = 10;
    for (int64_t i = 0; i < count; ++i) {
      Slide slide;
      slide.start_ms = deck.talk_end_ms * i / count;
      slide.end_ms = deck.talk_end_ms * (i + 1) / count;
      std::vector<std::string> lines;
      std::vector<std::string> title;
      for (int k = 0; k < 3; ++k) title.push_back(FillerWord(topic, planted).surface);
      title.front() = CapitalizeFirst(title.front());
      lines.push_back(Join(title, " "));
      std::set<std::string> shown;
      for (const auto& tok : script.tokens) {
        if (!tok.is_new_word || tok.start_ms < slide.start_ms ||
            tok.start_ms >= slide.end_ms)
          continue;
        const std::string surface = StripPunctuation(tok.ref_surface);
        if (shown.count(surface) || rng_() % 10 >= 8) continue;
        shown.insert(surface);
        std::vector<std::string> bullet{"-"};
        for (int k = 0; k < 2; ++k) bullet.push_back(FillerWord(topic, planted).surface);
        bullet.push_back(surface);
        lines.push_back(Join(bullet, " "));
      }
      std::vector<std::string> noise;
      for (int k = 0; k < 2; ++k) noise.push_back(Pick(kOcrNoise, rng_));
      lines.push_back(Join(noise, " "));
      slide.text = Join(lines, "\n") + "\n";
      deck.slides.push_back(std::move(slide));
    }
    return deck;
  }

  const SynthOptions& options_;
  std::mt19937_64 rng_;
  std::set<std::string> vocab_;
  std::set<std::string> all_new_;
  std::vector<std::string> stems_;
};

}  // namespace

std::string CorruptWord(std::string_view word, uint64_t seed, int edits) {
  std::mt19937_64 rng(seed);
  const std::u32string original = ToCodePoints(word);
  for (;;) {
    std::u32string cps = original;
    for (int e = 0; e < edits; ++e) {
      const char32_t letter = U'a' + static_cast<char32_t>(rng() % 26);
      const std::size_t op = cps.size() <= 2 ? rng() % 2 : rng() % 3;
      if (op == 0 && !cps.empty()) {
        cps[rng() % cps.size()] = letter;
      } else if (op == 1 || cps.empty()) {
        cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(rng() % (cps.size() + 1)),
                   letter);
      } else {
        cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(rng() % cps.size()));
      }
    }
    if (cps == original || cps.empty()) continue;
    std::string out;
    for (char32_t cp : cps) AppendUtf8(cp, out);
    return out;
  }
}

SynthCorpus GenerateCorpus(const SynthOptions& options) {
  if (options.words_per_script < 200)
    throw Error(ErrorCode::kConfig, "scripts need at least 200 words");
  return Builder(options).Build();
}

nlohmann::json SynthCorpus::Manifest() const {
  nlohmann::json scripts_json = nlohmann::json::array();
  for (const auto& s : scripts) {
    nlohmann::json j = {{"name", s.corpus.name}, {"new_words", s.new_words}};
    if (!s.planted.empty()) {
      j["planted"] = s.planted;
      j["planted_for"] = s.planted_for;
    }
    scripts_json.push_back(std::move(j));
  }
  return {{"seed", seed}, {"hard_words", hard_words}, {"scripts", scripts_json}};
}

namespace {

struct Expected {
  std::string entry;
  std::size_t begin = 0, end = 0;
  bool planted = false;
  bool hard = false;
};

std::vector<MemoryMatch> MatchWith(const std::vector<MemoryEntry>& entries,
                                   std::span<const BeamToken> top, double theta) {
  auto snapshot = std::make_shared<const MemorySnapshot>(entries, 1);
  return Matcher(snapshot, theta).Match(top);
}

void Fail(const std::string& script, const std::string& what) {
  throw Error(ErrorCode::kConfig, "synthetic corpus, script " + script + ": " + what);
}

}  // namespace

void VerifyCorpus(const SynthCorpus& corpus, double theta) {
  TrainingVocabulary vocab(corpus.vocab);
  std::set<std::string> hard(corpus.hard_words.begin(), corpus.hard_words.end());
  std::map<std::string, std::vector<std::string>> aliases;
  for (const auto& e : corpus.aliases) aliases[e.normalized] = e.aliases;
  std::map<std::string, std::size_t> occurrences;

  for (const auto& s : corpus.scripts) {
    const Script& script = s.corpus.script;
    script.Validate();
    const std::string& name = s.corpus.name;
    std::vector<std::string> expected_words;
    for (const auto& w : s.new_words) expected_words.push_back(w);
    const auto extracted = ExtractNewWords(s.corpus.TranscriptText(), vocab);
    if (extracted != expected_words)
      Fail(name, "extracted new words [" + Join(extracted, ", ") +
                     "] differ from the plan [" + Join(expected_words, ", ") + "]");

    const HypothesisBeam beam = RecognizeChunk(script.tokens, 1, 0);
    const auto& top = beam.top();
    std::vector<Expected> expected;
    for (std::size_t i = 0, b = 0; i < script.tokens.size(); ++i) {
      std::size_t e = b;
      while (e < top.size() && top[e].source == i) ++e;
      const ScriptToken& tok = script.tokens[i];
      const std::string norm = NormalizeToken(tok.ref_surface);
      if (tok.is_new_word) {
        expected.push_back({norm, b, e, false, hard.count(norm) > 0});
        ++occurrences[norm];
      } else if (!s.planted.empty() && norm == s.planted) {
        expected.push_back({s.planted_for, b, e, true, false});
      }
      b = e;
    }

    std::vector<MemoryEntry> plain, with_aliases;
    for (const auto& w : s.new_words) {
      MemoryEntry e;
      e.surface = w;
      e.normalized = NormalizeToken(w);
      plain.push_back(e);
      if (auto it = aliases.find(e.normalized); it != aliases.end())
        e.aliases = it->second;
      with_aliases.push_back(std::move(e));
    }
    auto check = [&](const std::vector<MemoryMatch>& matches, bool use_aliases,
                     bool extended, const char* label) {
      std::size_t k = 0;
      for (const auto& ex : expected) {
        if (ex.hard && !use_aliases) continue;
        if (k >= matches.size() || matches[k].entry_normalized != ex.entry ||
            matches[k].begin != ex.begin || matches[k].end != ex.end)
          Fail(name, std::string(label) + ": no match for " + ex.entry + " at word " +
                         std::to_string(ex.begin));
        if (matches[k].suppressed_by_extended != (extended && ex.planted))
          Fail(name, std::string(label) + ": wrong suppression at word " +
                         std::to_string(ex.begin));
        ++k;
      }
      if (k != matches.size())
        Fail(name, std::string(label) + ": unexpected match of " +
                       matches[k].entry_normalized + " at word " +
                       std::to_string(matches[k].begin));
    };
    check(MatchWith(with_aliases, top, theta), true, false, "aliases");
    check(MatchWith(plain, top, theta), false, false, "no aliases");
    if (!s.planted.empty()) {
      auto ext = with_aliases;
      MemoryEntry e;
      e.surface = e.normalized = s.planted;
      e.extended = true;
      ext.push_back(e);
      // The extended entry's own exact hits are not new-word matches.
      auto matches = MatchWith(ext, top, theta);
      std::erase_if(matches, [&](const MemoryMatch& m) {
        return m.entry_normalized == s.planted;
      });
      check(matches, true, true, "extended");
    }
  }
  if (corpus.scripts.size() < 10) throw Error(ErrorCode::kConfig, "fewer than 10 scripts");
  if (occurrences.size() < 40) throw Error(ErrorCode::kConfig, "fewer than 40 new words");
  std::size_t repeated = 0;
  for (const auto& [w, c] : occurrences) repeated += c >= 2;
  if (repeated * 2 < occurrences.size())
    throw Error(ErrorCode::kConfig, "fewer than half the new words repeat");
}

void WriteCorpus(const SynthCorpus& corpus, const std::string& dir) {
  const fs::path base(dir);
  std::string vocab;
  for (const auto& w : corpus.vocab) vocab += w + "\n";
  WriteFile((base / "train.vocab").string(), vocab);
  WriteFile((base / "aliases.memory").string(), FormatMemoryList(corpus.aliases));
  std::string lexicon;
  for (const auto& w : corpus.lexicon) lexicon += w + "\n";
  WriteFile((base / "casing.lexicon").string(), lexicon);
  WriteFile((base / "manifest.json").string(), corpus.Manifest().dump(2) + "\n");
  for (const auto& s : corpus.scripts) {
    const fs::path scripts = base / "scripts";
    const std::string& name = s.corpus.name;
    WriteFile((scripts / (name + ".script")).string(), FormatScript(s.corpus.script));
    WriteFile((scripts / (name + ".segments")).string(),
              FormatSegments(s.corpus.segments));
    if (s.corpus.paper_text)
      WriteFile((scripts / (name + ".paper.txt")).string(), *s.corpus.paper_text);
    if (s.corpus.slides) {
      const SlideSchedule& deck = *s.corpus.slides;
      std::string schedule = std::to_string(deck.talk_end_ms) + "\n";
      for (std::size_t i = 0; i < deck.slides.size(); ++i) {
        char file[32];
        std::snprintf(file, sizeof(file), "slide%02zu.txt", i + 1);
        const std::string rel = name + ".slides.d/" + file;
        WriteFile((scripts / rel).string(), deck.slides[i].text);
        schedule += std::to_string(deck.slides[i].start_ms) + "\t" +
                    std::to_string(deck.slides[i].end_ms) + "\t" + rel + "\n";
      }
      WriteFile((scripts / (name + ".slides")).string(), schedule);
    }
  }
}

}  // namespace membooth

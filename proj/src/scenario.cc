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

#include "membooth/scenario.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "membooth/casing_punct.h"
#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/session_log.h"
#include "membooth/text.h"

namespace membooth {

namespace {

struct ApproachName {
  Approach::Kind kind;
  const char* name;
};

constexpr ApproachName kApproachNames[] = {
    {Approach::Kind::kEmpty, "empty"},
    {Approach::Kind::kOracle, "oracle"},
    {Approach::Kind::kOracleAfterOcc, "oracle_after_occ"},
    {Approach::Kind::kOracleBeforeOcc, "oracle_before_occ"},
    {Approach::Kind::kOracleExtAfterOcc, "oracle_ext_after_occ"},
    {Approach::Kind::kOracleExtBeforeOcc, "oracle_ext_before_occ"},
    {Approach::Kind::kSourcePaper, "source_paper"},
    {Approach::Kind::kSourceSlides, "source_slides"},
    {Approach::Kind::kSourceCurrSlides, "source_curr_slides"},
};

// Start indices of non-overlapping occurrences of `phrase` in `words`.
std::vector<std::size_t> FindPhrase(const std::vector<std::string>& words,
                                    const std::vector<std::string>& phrase) {
  std::vector<std::size_t> out;
  if (phrase.empty()) return out;
  for (std::size_t i = 0; i + phrase.size() <= words.size();) {
    if (std::equal(phrase.begin(), phrase.end(),
                   words.begin() + static_cast<std::ptrdiff_t>(i))) {
      out.push_back(i);
      i += phrase.size();
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::string> ReferenceWords(const Script& script) {
  std::vector<std::string> out;
  out.reserve(script.tokens.size());
  for (const auto& t : script.tokens) out.push_back(NormalizePhrase(t.ref_surface));
  return out;
}

std::vector<std::string> AliasesFor(
    const std::string& normalized, bool enabled,
    const std::unordered_map<std::string, std::vector<std::string>>& aliases) {
  if (!enabled) return {};
  auto it = aliases.find(normalized);
  return it == aliases.end() ? std::vector<std::string>{} : it->second;
}

MemoryMutation AddAt(int64_t at_ms, std::string surface,
                     std::vector<std::string> aliases, std::string trigger) {
  MemoryMutation m;
  m.kind = MemoryMutation::Kind::kAdd;
  m.at_ms = at_ms;
  m.surface = std::move(surface);
  m.aliases = std::move(aliases);
  m.trigger = std::move(trigger);
  return m;
}

// Seeded Fisher-Yates; std::shuffle's output is not portable.
template <typename T>
void Shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

Approach Approach::Parse(std::string_view text) {
  for (const auto& a : kApproachNames)
    if (text == a.name) return {a.kind, 0};
  std::string_view rest;
  if (text.rfind("random_memory(", 0) == 0 && text.back() == ')') {
    rest = text.substr(14, text.size() - 15);
  } else if (text.rfind("random_memory:", 0) == 0) {
    rest = text.substr(14);
  } else {
    throw Error(ErrorCode::kConfig, "unknown approach '" + std::string(text) + "'");
  }
  int64_t k = 0;
  try {
    k = ParseInt(rest, "random_memory size");
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (k < 0) throw Error(ErrorCode::kConfig, "random_memory size must be >= 0");
  return {Kind::kRandomMemory, static_cast<std::size_t>(k)};
}

std::string Approach::ToString() const {
  if (kind == Kind::kRandomMemory)
    return "random_memory(" + std::to_string(random_k) + ")";
  for (const auto& a : kApproachNames)
    if (a.kind == kind) return a.name;
  return "empty";
}

bool Approach::uses_operator() const {
  return kind == Kind::kOracleAfterOcc || kind == Kind::kOracleExtAfterOcc ||
         kind == Kind::kOracleExtBeforeOcc;
}

bool Approach::extended_policy() const {
  return kind == Kind::kOracleExtAfterOcc || kind == Kind::kOracleExtBeforeOcc;
}

bool Approach::is_source() const {
  return kind == Kind::kSourcePaper || kind == Kind::kSourceSlides ||
         kind == Kind::kSourceCurrSlides;
}

ScenarioConfig ScenarioConfig::FromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {
      "approach",  "seeds",          "theta",        "min_chunk_ms",
      "jitter",    "n_best",         "max_divergence", "stall_chunks",
      "mode",      "before_margin_ms", "aliases",    "reaction_latency_ms",
      "corpus",    "scripts",        "eval_words"};
  if (!j.is_object())
    throw Error(ErrorCode::kConfig, "scenario must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKnown.count(key))
      throw Error(ErrorCode::kConfig, "unknown scenario option '" + key + "'");
  ScenarioConfig c;
  try {
    c.approach = Approach::Parse(j.value("approach", std::string("empty")));
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      if (s.is_number_integer()) {
        for (uint64_t i = 0; i < s.get<uint64_t>(); ++i) c.seeds.push_back(i);
      } else {
        c.seeds = s.get<std::vector<uint64_t>>();
      }
    }
    c.theta = j.value("theta", kDefaultTheta);
    c.policy.min_chunk_ms = j.value("min_chunk_ms", c.policy.min_chunk_ms);
    if (j.contains("jitter"))
      c.policy.jitter = JitterModel::Parse(j.at("jitter").get<std::string>());
    c.policy.n_best = j.value("n_best", c.policy.n_best);
    c.policy.max_divergence = j.value("max_divergence", c.policy.max_divergence);
    c.policy.stall_chunks = j.value("stall_chunks", c.policy.stall_chunks);
    if (j.contains("mode"))
      c.mode = EmissionMode::Parse(j.at("mode").get<std::string>());
    c.before_margin_ms = j.value("before_margin_ms", c.before_margin_ms);
    c.use_aliases = j.value("aliases", c.use_aliases);
    c.reaction_latency_ms = j.value("reaction_latency_ms", c.reaction_latency_ms);
    c.corpus_root = j.value("corpus", std::string{});
    c.scripts = j.value("scripts", std::vector<std::string>{});
    for (const auto& w : j.value("eval_words", std::vector<std::string>{}))
      c.eval_words.insert(NormalizePhrase(w));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (c.seeds.empty()) c.seeds.push_back(0);
  if (!(c.theta > 0.0 && c.theta <= 1.0))
    throw Error(ErrorCode::kConfig, "theta must lie in (0, 1]");
  if (c.reaction_latency_ms < 0)
    throw Error(ErrorCode::kConfig, "reaction latency must be >= 0");
  c.policy.Validate();
  return c;
}

nlohmann::json ScenarioConfig::ToJson() const {
  return {{"approach", approach.ToString()},
          {"seeds", seeds},
          {"theta", theta},
          {"min_chunk_ms", policy.min_chunk_ms},
          {"jitter", policy.jitter.ToString()},
          {"n_best", policy.n_best},
          {"max_divergence", policy.max_divergence},
          {"stall_chunks", policy.stall_chunks},
          {"mode", mode.ToString()},
          {"before_margin_ms", before_margin_ms},
          {"aliases", use_aliases},
          {"reaction_latency_ms", reaction_latency_ms},
          {"corpus", corpus_root},
          {"scripts", scripts},
          {"eval_words", std::vector<std::string>(eval_words.begin(),
                                                  eval_words.end())}};
}

SessionConfig ScenarioConfig::Session(uint64_t seed) const {
  SessionConfig s;
  s.policy = policy;
  s.theta = theta;
  s.mode = mode;
  s.seed = seed;
  return s;
}

OperatorAgent ScenarioConfig::Agent() const {
  OperatorAgent a;
  a.reaction_latency_ms = reaction_latency_ms;
  a.policy = approach.extended_policy()
                 ? OperatorAgent::Policy::kAlsoAddExtendedOnFalsePositive
                 : OperatorAgent::Policy::kAddNewWordOnMiss;
  return a;
}

std::set<std::string> TranscriptNewWords(const CorpusScript& script,
                                         const TrainingVocabulary& vocab) {
  std::set<std::string> out;
  for (const auto& w : ExtractNewWords(script.TranscriptText(), vocab))
    out.insert(NormalizePhrase(w));
  return out;
}

namespace {

std::optional<std::string> SourceText(const Approach& approach,
                                      const CorpusScript& script) {
  switch (approach.kind) {
    case Approach::Kind::kSourcePaper:
      if (!script.paper_text)
        throw Error(ErrorCode::kMissingCorpusInput,
                    "paper text for script '" + script.name + "'");
      return script.paper_text;
    case Approach::Kind::kSourceSlides:
    case Approach::Kind::kSourceCurrSlides:
      if (!script.slides)
        throw Error(ErrorCode::kMissingCorpusInput,
                    "slide schedule for script '" + script.name + "'");
      return script.slides->AllText();
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<std::set<std::string>> SourceNewWords(
    const Approach& approach, const CorpusScript& script,
    const TrainingVocabulary& vocab) {
  const auto text = SourceText(approach, script);
  if (!text) return std::nullopt;
  std::set<std::string> out;
  for (const auto& w : ExtractNewWords(*text, vocab)) out.insert(NormalizePhrase(w));
  return out;
}

std::vector<MemoryMutation> BuildInitialMemory(const ScenarioConfig& config,
                                               const CorpusScript& script,
                                               const Corpus& corpus,
                                               uint64_t seed) {
  std::vector<MemoryMutation> out;
  const auto& aliases = corpus.aliases;
  const bool with_aliases = config.use_aliases;
  auto add_all_at_zero = [&](const std::vector<std::string>& words,
                             const std::string& trigger) {
    for (const auto& w : words) {
      const std::string norm = NormalizePhrase(w);
      out.push_back(AddAt(0, w, AliasesFor(norm, with_aliases, aliases), trigger));
    }
  };

  switch (config.approach.kind) {
    case Approach::Kind::kEmpty:
    case Approach::Kind::kOracleAfterOcc:
    case Approach::Kind::kOracleExtAfterOcc:
      return out;

    case Approach::Kind::kOracle:
      add_all_at_zero(ExtractNewWords(script.TranscriptText(), corpus.vocab),
                      "oracle");
      return out;

    case Approach::Kind::kOracleBeforeOcc:
    case Approach::Kind::kOracleExtBeforeOcc: {
      const auto ref = ReferenceWords(script.script);
      for (const auto& w : ExtractNewWords(script.TranscriptText(), corpus.vocab)) {
        const std::string norm = NormalizePhrase(w);
        const auto hits = FindPhrase(ref, SplitWhitespace(norm));
        if (hits.empty()) continue;
        const int64_t first = script.script.tokens[hits.front()].start_ms;
        out.push_back(AddAt(std::max<int64_t>(0, first - config.before_margin_ms),
                            w, AliasesFor(norm, with_aliases, aliases),
                            "before_first_occurrence"));
      }
      std::stable_sort(out.begin(), out.end(),
                       [](const MemoryMutation& a, const MemoryMutation& b) {
                         return a.at_ms < b.at_ms;
                       });
      return out;
    }

    case Approach::Kind::kSourcePaper:
    case Approach::Kind::kSourceSlides:
      add_all_at_zero(ExtractNewWords(*SourceText(config.approach, script),
                                      corpus.vocab),
                      config.approach.ToString());
      return out;

    case Approach::Kind::kSourceCurrSlides: {
      if (!script.slides)
        throw Error(ErrorCode::kMissingCorpusInput,
                    "slide schedule for script '" + script.name + "'");
      const SlideSchedule& deck = *script.slides;
      std::vector<int64_t> times{0};
      for (const auto& s : deck.slides)
        if (s.start_ms > 0 && s.start_ms <= deck.talk_end_ms) times.push_back(s.start_ms);
      std::map<std::string, std::string> current;  // normalized -> surface
      for (int64_t t : times) {
        std::map<std::string, std::string> next;
        for (const auto& w : ExtractNewWords(WindowSlides(deck, t), corpus.vocab))
          next.emplace(NormalizePhrase(w), w);
        for (const auto& [norm, surface] : current) {
          if (next.count(norm)) continue;
          MemoryMutation m;
          m.kind = MemoryMutation::Kind::kRemove;
          m.at_ms = t;
          m.surface = norm;
          m.trigger = "slide_window";
          out.push_back(std::move(m));
        }
        for (const auto& [norm, surface] : next) {
          if (current.count(norm)) continue;
          out.push_back(AddAt(t, surface, AliasesFor(norm, with_aliases, aliases),
                              "slide_window"));
        }
        current = std::move(next);
      }
      return out;
    }

    case Approach::Kind::kRandomMemory: {
      std::set<std::string> spoken;
      for (const auto& w : ReferenceWords(script.script)) spoken.insert(w);
      std::vector<std::string> pool;
      for (auto& w : corpus.vocab.SortedWords())
        if (!spoken.count(w)) pool.push_back(std::move(w));
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x5DEECE66DULL);
      Shuffle(pool, rng);
      const std::size_t k = std::min(config.approach.random_k, pool.size());
      for (std::size_t i = 0; i < k; ++i)
        out.push_back(AddAt(0, pool[i], {}, "random_memory"));
      return out;
    }
  }
  return out;
}

OperatorLoop::OperatorLoop(
    OperatorAgent agent, const Script& script, std::set<std::string> new_words,
    const std::unordered_map<std::string, std::vector<std::string>>* aliases)
    : agent_(agent), script_(script), new_words_(std::move(new_words)),
      aliases_(aliases) {
  // Reference casing of each new word, first occurrence wins.
  const auto ref = ReferenceWords(script_);
  for (const auto& w : new_words_) {
    const auto phrase = SplitWhitespace(w);
    const auto hits = FindPhrase(ref, phrase);
    if (hits.empty()) {
      surface_[w] = w;
      continue;
    }
    std::vector<std::string> cased;
    for (std::size_t k = 0; k < phrase.size(); ++k)
      cased.push_back(StripPunctuation(script_.tokens[hits.front() + k].ref_surface));
    surface_[w] = Join(cased, " ");
  }
}

std::vector<MemoryMutation> OperatorLoop::Observe(const EmittedSegment& segment,
                                                  int64_t now_ms,
                                                  const MemoryStore& store) {
  std::vector<MemoryMutation> out;
  const int64_t at = now_ms + agent_.reaction_latency_ms;
  std::vector<std::string> ref;
  for (std::size_t i = segment.script_begin; i < segment.script_end; ++i)
    ref.push_back(NormalizePhrase(script_.tokens[i].ref_surface));
  std::vector<std::string> hyp;
  for (const auto& t : segment.tokens) hyp.push_back(t.text);

  auto record = [&](MemoryMutation m) {
    events_.push_back({now_ms, segment.id, m.trigger, m});
    out.push_back(std::move(m));
  };

  for (const auto& w : new_words_) {
    const auto phrase = SplitWhitespace(w);
    const auto in_ref = FindPhrase(ref, phrase).size();
    if (in_ref == 0 || FindPhrase(hyp, phrase).size() >= in_ref) continue;
    if (store.Contains(w) || scheduled_.count(w)) continue;
    scheduled_.insert(w);
    std::vector<std::string> aliases;
    if (aliases_) {
      auto it = aliases_->find(w);
      if (it != aliases_->end()) aliases = it->second;
    }
    record(AddAt(at, surface_[w], std::move(aliases),
                 "miss:" + w + "@segment" + std::to_string(segment.id)));
  }

  if (agent_.policy != OperatorAgent::Policy::kAlsoAddExtendedOnFalsePositive)
    return out;
  const auto snapshot = store.Snapshot();
  for (std::size_t i = 0; i < segment.tokens.size();) {
    const DecodedToken& t = segment.tokens[i];
    std::size_t j = i + 1;
    if (!t.provenance.is_memory_hit()) {
      i = j;
      continue;
    }
    while (j < segment.tokens.size() &&
           segment.tokens[j].provenance.entry == t.provenance.entry &&
           segment.tokens[j].source_begin == t.source_begin &&
           segment.tokens[j].provenance.entry_word > 0)
      ++j;
    std::vector<std::string> heard;
    for (std::size_t s = t.source_begin; s < t.source_end; ++s)
      heard.push_back(NormalizePhrase(script_.tokens[s].ref_surface));
    if (FindPhrase(heard, SplitWhitespace(t.provenance.entry)).empty()) {
      for (std::size_t s = t.source_begin; s < t.source_end; ++s) {
        const std::string word = NormalizePhrase(script_.tokens[s].ref_surface);
        if (new_words_.count(word) || scheduled_extended_.count(word)) continue;
        const MemoryEntry* existing = snapshot->Find(word);
        if (existing && existing->extended) continue;
        scheduled_extended_.insert(word);
        MemoryMutation m = AddAt(
            at, StripPunctuation(script_.tokens[s].ref_surface), {},
            "false_positive:" + t.provenance.entry + "@segment" +
                std::to_string(segment.id));
        m.extended = true;
        record(std::move(m));
      }
    }
    i = j;
  }
  return out;
}

void OperatorLoop::OnSegment(const EmittedSegment& segment,
                             StreamSession& session) {
  for (auto& m : Observe(segment, session.now(), session.store()))
    session.Schedule(std::move(m));
}

std::vector<OperatorEvent> RunOperatorLoop(const SessionResult& session,
                                           const OperatorAgent& agent,
                                           const Script& script,
                                           const std::set<std::string>& new_words) {
  OperatorLoop loop(agent, script, new_words);
  MemoryStore empty;
  for (const auto& seg : session.segments) loop.Observe(seg, seg.wall_emit_ms, empty);
  return loop.events();
}

ScriptRun RunScript(const ScenarioConfig& config, const CorpusScript& script,
                    const Corpus& corpus, uint64_t seed) {
  const std::set<std::string> new_words = TranscriptNewWords(script, corpus.vocab);
  auto schedule = BuildInitialMemory(config, script, corpus, seed);

  MemoryStore store;
  StreamSession session(script.script, config.Session(seed), store);
  std::optional<OperatorLoop> agent;
  if (config.approach.uses_operator()) {
    agent.emplace(config.Agent(), script.script, new_words,
                  config.use_aliases ? &corpus.aliases : nullptr);
    session.AddListener(&*agent);
  }
  for (auto& m : schedule) session.Schedule(std::move(m));
  session.RunToEnd();
  ScriptRun run = EvaluateSession(config, script, corpus, session.TakeResult());
  if (agent) run.operator_events = agent->events();
  return run;
}

ScriptRun EvaluateSession(const ScenarioConfig& config, const CorpusScript& script,
                          const Corpus& corpus, SessionResult session) {
  ScriptRun run;
  run.script = script.name;
  run.session = std::move(session);
  std::set<std::string> new_words = TranscriptNewWords(script, corpus.vocab);
  const auto source_words = SourceNewWords(config.approach, script, corpus.vocab);

  // Case each segment with the snapshot it was decoded against, then
  // punctuate the whole stream.
  std::vector<DecodedToken> tokens;
  std::vector<CasedToken> cased;
  for (const EmittedSegment* seg : run.session.LiveSegments()) {
    const auto it = run.session.snapshots.find(seg->snapshot_version);
    const MemorySnapshot empty_snapshot;
    const MemorySnapshot& snap =
        it == run.session.snapshots.end() ? empty_snapshot : *it->second;
    auto part = ApplyCasing(seg->tokens, snap, corpus.lexicon, tokens.empty());
    cased.insert(cased.end(), part.begin(), part.end());
    tokens.insert(tokens.end(), seg->tokens.begin(), seg->tokens.end());
  }
  std::vector<int64_t> gaps;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    gaps.push_back(std::max<int64_t>(0, tokens[i + 1].start_ms - tokens[i].end_ms));
  cased = Punctuate(std::move(cased), gaps);

  std::vector<HypWord> hyp;
  std::vector<std::string> hyp_words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    hyp.push_back({tokens[i].text, cased[i].text});
    hyp_words.push_back(tokens[i].text);
    if (i) run.cased_transcript.push_back(' ');
    run.cased_transcript += cased[i].Render();
  }

  const auto refs = ReferenceSegments(script.script, script.segments);
  const auto ref_words = NormalizedWords(refs);
  const SegmentAlignment alignment = SegmentMwer(hyp_words, ref_words);
  run.edit_distance = alignment.total_edit_distance;
  for (const auto& seg : ref_words) run.ref_words += seg.size();

  if (!config.eval_words.empty()) {
    std::set<std::string> kept;
    for (const auto& w : new_words)
      if (config.eval_words.count(w)) kept.insert(w);
    new_words = std::move(kept);
  }
  run.all = NewWordMetrics(alignment, refs, hyp, new_words);
  if (source_words)
    run.intersected = NewWordMetrics(alignment, refs, hyp, new_words, source_words);
  return run;
}

RunResult RunScenario(const ScenarioConfig& config, const Corpus& corpus,
                      uint64_t seed) {
  RunResult result;
  result.approach = config.approach.ToString();
  result.seed = seed;
  std::vector<NewWordReport> all, intersected;
  std::size_t edits = 0, words = 0;
  for (const auto& script : corpus.scripts) {
    if (!config.scripts.empty() &&
        std::find(config.scripts.begin(), config.scripts.end(), script.name) ==
            config.scripts.end())
      continue;
    ScriptRun run = RunScript(config, script, corpus, seed);
    edits += run.edit_distance;
    words += run.ref_words;
    all.push_back(run.all);
    if (run.intersected) intersected.push_back(*run.intersected);
    result.scripts.push_back(std::move(run));
  }
  if (result.scripts.empty())
    throw Error(ErrorCode::kMissingCorpusInput, "no scripts selected");
  if (words == 0) throw Error(ErrorCode::kEmptyReference, "corpus has no words");
  result.wer = static_cast<double>(edits) / static_cast<double>(words);
  result.all = MergeReports(all);
  if (!intersected.empty()) result.intersected = MergeReports(intersected);
  return result;
}

std::map<std::string, double> RunResult::Metrics() const {
  std::map<std::string, double> m = {
      {"wer", wer},
      {"recall", all.recall},
      {"precision", all.precision},
      {"f1", all.f1},
      {"casing_accuracy", all.casing_accuracy},
      {"tp", static_cast<double>(all.total.tp)},
      {"fp", static_cast<double>(all.total.fp)},
      {"fn", static_cast<double>(all.total.fn)},
  };
  if (intersected) {
    m["src_recall"] = intersected->recall;
    m["src_precision"] = intersected->precision;
    m["src_f1"] = intersected->f1;
  }
  return m;
}

nlohmann::json RunResult::ToJson() const {
  nlohmann::json scripts_json = nlohmann::json::array();
  for (const auto& s : scripts) {
    nlohmann::json j = {{"script", s.script},
                        {"edit_distance", s.edit_distance},
                        {"ref_words", s.ref_words},
                        {"all", membooth::ToJson(s.all)}};
    if (s.intersected) j["intersected"] = membooth::ToJson(*s.intersected);
    scripts_json.push_back(std::move(j));
  }
  nlohmann::json j = {{"approach", approach},
                      {"seed", seed},
                      {"metrics", Metrics()},
                      {"all", membooth::ToJson(all)},
                      {"scripts", scripts_json}};
  if (intersected) j["intersected"] = membooth::ToJson(*intersected);
  return j;
}

std::string MatrixResult::AggregateCsv() const {
  std::ostringstream out;
  out << "approach,metric,mean,std,n\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& r : rows)
    out << r.approach << ',' << r.metric << ',' << r.summary.mean << ','
        << r.summary.std << ',' << r.summary.n << '\n';
  return out.str();
}

std::string MatrixResult::CurveCsv() const {
  std::ostringstream out;
  out << "k,mean_wer,std_wer,n\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& p : memory_curve)
    out << p.k << ',' << p.wer.mean << ',' << p.wer.std << ',' << p.wer.n << '\n';
  return out.str();
}

MatrixResult RunMatrix(const std::vector<ScenarioConfig>& configs,
                       const Corpus& corpus, bool keep_runs) {
  MatrixResult out;
  for (const auto& config : configs) {
    std::vector<std::map<std::string, double>> metrics;
    for (uint64_t seed : config.seeds) {
      try {
        RunResult run = RunScenario(config, corpus, seed);
        metrics.push_back(run.Metrics());
        if (keep_runs) {
          out.runs.push_back(std::move(run));
        } else {
          run.scripts.clear();
          out.runs.push_back(std::move(run));
        }
      } catch (const Error& e) {
        out.failures.push_back(config.approach.ToString() + " seed " +
                               std::to_string(seed) + ": " + e.what());
      }
    }
    const auto summary = AggregateRuns(metrics);
    for (const auto& [metric, s] : summary)
      out.rows.push_back({config.approach.ToString(), metric, s});
    if (config.approach.kind == Approach::Kind::kRandomMemory &&
        summary.count("wer"))
      out.memory_curve.push_back({config.approach.random_k, summary.at("wer")});
  }
  std::stable_sort(out.memory_curve.begin(), out.memory_curve.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.k < b.k; });
  return out;
}

}  // namespace membooth

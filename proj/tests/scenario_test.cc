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

#include "doctest.h"
#include "membooth/error.h"
#include "membooth/scenario.h"
#include "test_support.h"

using namespace membooth;
using membooth::testing::MakeScript;
using membooth::testing::RepoCorpus;

namespace {

// A one-script corpus whose vocabulary is every non-new reference word.
Corpus TinyCorpus(const Script& script,
                  std::unordered_map<std::string, std::vector<std::string>> aliases = {}) {
  Corpus c;
  c.root = "memory";
  CorpusScript cs;
  cs.name = "tiny";
  cs.script = script;
  cs.segments = {{0, script.duration_ms() + 1}};
  for (const auto& t : script.tokens)
    if (!t.is_new_word) c.vocab.Insert(t.ref_surface);
  c.scripts.push_back(cs);
  c.aliases = std::move(aliases);
  return c;
}

std::vector<std::string> Filler(std::size_t n) {
  const char* pool[] = {"and", "then", "we", "look", "at", "the", "data", "again"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[i % 8]);
  return out;
}

ScenarioConfig Config(const std::string& approach) {
  ScenarioConfig c;
  c.approach = Approach::Parse(approach);
  c.policy.jitter = JitterModel::Parse("none");
  c.seeds = {0};
  return c;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("approach names") {
  for (const char* name : {"empty", "oracle", "oracle_after_occ", "oracle_before_occ",
                           "oracle_ext_after_occ", "oracle_ext_before_occ", "source_paper",
                           "source_slides", "source_curr_slides", "random_memory(250)"})
    CHECK(Approach::Parse(name).ToString() == name);
  CHECK(Approach::Parse("random_memory:7").random_k == 7);
  CHECK(Approach::Parse("random_memory(0)").kind == Approach::Kind::kRandomMemory);
  for (const char* bad : {"", "orakel", "random_memory(-1)", "random_memory(x)",
                          "random_memory:"}) {
    try {
      Approach::Parse(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }
  CHECK(Approach::Parse("oracle_ext_before_occ").uses_operator());
  CHECK(Approach::Parse("oracle_ext_before_occ").extended_policy());
  CHECK_FALSE(Approach::Parse("oracle_before_occ").uses_operator());
  CHECK(Approach::Parse("source_slides").is_source());
}

TEST_CASE("scenario config from json") {
  const auto c = ScenarioConfig::FromJson(nlohmann::json::parse(
      R"({"approach":"oracle","seeds":3,"theta":0.8,"jitter":"none","mode":"delay:900",
          "eval_words":["MQM"]})"));
  CHECK(c.seeds == std::vector<uint64_t>{0, 1, 2});
  CHECK(c.theta == 0.8);
  CHECK(c.mode.window_ms == 900);
  CHECK(c.eval_words == std::set<std::string>{"mqm"});
  CHECK(ScenarioConfig::FromJson(c.ToJson()).ToJson() == c.ToJson());
  CHECK(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"seeds":[4,9]})")).seeds ==
        std::vector<uint64_t>{4, 9});
  for (const char* bad : {R"({"speed":2})", R"({"theta":0})", R"({"theta":"high"})",
                          R"({"min_chunk_ms":0})", R"([1,2])", R"({"approach":"x"})",
                          R"({"reaction_latency_ms":-5})"}) {
    try {
      ScenarioConfig::FromJson(nlohmann::json::parse(bad));
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }
}

TEST_CASE("empty and oracle initial memory") {
  const Corpus& corpus = RepoCorpus();
  const CorpusScript& rehm = *corpus.Find("rehm_long");
  CHECK(BuildInitialMemory(Config("empty"), rehm, corpus, 0).empty());
  CHECK(BuildInitialMemory(Config("oracle_after_occ"), rehm, corpus, 0).empty());
  const auto adds = BuildInitialMemory(Config("oracle"), rehm, corpus, 0);
  std::vector<std::string> surfaces;
  for (const auto& m : adds) {
    CHECK(m.at_ms == 0);
    CHECK(m.kind == MemoryMutation::Kind::kAdd);
    surfaces.push_back(m.surface);
  }
  CHECK(surfaces == std::vector<std::string>{"pipelining", "Friem", "iAnnotate", "MQM",
                                             "LSPs", "eServices", "semantification",
                                             "Aljoscha", "Cortana", "workflows", "DFKI",
                                             "annotating", "NLP"});
  for (const auto& m : adds)
    if (m.surface == "MQM") CHECK(m.aliases == std::vector<std::string>{"m q m"});
  auto no_alias = Config("oracle");
  no_alias.use_aliases = false;
  for (const auto& m : BuildInitialMemory(no_alias, rehm, corpus, 0)) CHECK(m.aliases.empty());
}

TEST_CASE("before occurrence adds just ahead of the first use") {
  Script s;
  int64_t t = 0;
  for (const char* w : {"so", "today", "we"}) {
    s.tokens.push_back({w, t, t + 300, w, false});
    t += 350;
  }
  s.tokens.push_back({"Zorblax", 42'000, 42'400, "sorblacks", true});
  s.tokens.push_back({"again", 42'450, 42'700, "again", false});
  s.tokens.push_back({"Zorblax", 50'000, 50'400, "sorblacks", true});
  const Corpus corpus = TinyCorpus(s);
  auto cfg = Config("oracle_before_occ");
  cfg.before_margin_ms = 500;
  const auto adds = BuildInitialMemory(cfg, corpus.scripts[0], corpus, 0);
  REQUIRE(adds.size() == 1);
  CHECK(adds[0].surface == "Zorblax");
  CHECK(adds[0].at_ms == 41'500);
  cfg.before_margin_ms = 60'000;
  CHECK(BuildInitialMemory(cfg, corpus.scripts[0], corpus, 0)[0].at_ms == 0);
}

TEST_CASE("source approaches need their inputs") {
  const auto s = MakeScript({"hello", "there"});
  const Corpus corpus = TinyCorpus(s);
  for (const char* a : {"source_curr_slides", "source_slides", "source_paper"}) {
    try {
      BuildInitialMemory(Config(a), corpus.scripts[0], corpus, 0);
      FAIL("no error for " << a);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingCorpusInput);
    }
  }
}

TEST_CASE("current slides follow the window") {
  const auto s = MakeScript({"hello", "there", "|", "and", "more", "|", "end"});
  Corpus corpus = TinyCorpus(s);
  SlideSchedule deck;
  deck.talk_end_ms = s.duration_ms();
  deck.slides = {{0, 500, "Alpha"}, {500, 1000, "Beta"}, {1000, 2000, "Gamma"},
                 {2000, deck.talk_end_ms, "Delta"}};
  corpus.scripts[0].slides = deck;
  const auto muts = BuildInitialMemory(Config("source_curr_slides"), corpus.scripts[0],
                                       corpus, 0);
  std::vector<std::string> log;
  for (const auto& m : muts)
    log.push_back(std::to_string(m.at_ms) +
                  (m.kind == MemoryMutation::Kind::kAdd ? "+" : "-") + m.surface);
  CHECK(log == std::vector<std::string>{"0+Alpha", "0+Beta", "500+Gamma", "1000-alpha",
                                        "1000+Delta", "2000-beta"});
}

TEST_CASE("random memory is seeded, nested and avoids spoken words") {
  const Corpus& corpus = RepoCorpus();
  const CorpusScript& rehm = *corpus.Find("rehm_long");
  auto words = [&](std::size_t k, uint64_t seed) {
    std::vector<std::string> out;
    for (const auto& m : BuildInitialMemory(Config("random_memory(" + std::to_string(k) + ")"),
                                            rehm, corpus, seed))
      out.push_back(m.surface);
    return out;
  };
  const auto small = words(100, 3), large = words(1000, 3);
  REQUIRE(small.size() == 100);
  REQUIRE(large.size() == 1000);
  CHECK(std::equal(small.begin(), small.end(), large.begin()));
  CHECK(words(100, 3) == small);
  CHECK(words(100, 4) != small);
  CHECK(words(0, 3).empty());
  std::set<std::string> spoken;
  for (const auto& t : rehm.script.tokens) spoken.insert(NormalizePhrase(t.ref_surface));
  for (const auto& w : large) CHECK(spoken.count(w) == 0);
}

TEST_CASE("operator adds a missed word and the next occurrence is found") {
  std::vector<std::string> items = {"we", "use", "MQM=m q m", "for", "quality"};
  for (const auto& w : Filler(24)) items.push_back(w);
  items.push_back("MQM=m q m");
  items.push_back("today");
  const auto s = MakeScript(items);
  const Corpus corpus = TinyCorpus(s, {{"mqm", {"m q m"}}});
  const auto cfg = Config("oracle_after_occ");
  const auto run = RunScript(cfg, corpus.scripts[0], corpus, 0);
  REQUIRE(run.operator_events.size() == 1);
  CHECK(run.operator_events[0].mutation.surface == "MQM");
  CHECK(run.operator_events[0].trigger.rfind("miss:mqm@segment", 0) == 0);
  const auto tokens = run.session.Transcript();
  std::vector<const DecodedToken*> hits;
  for (const auto& t : tokens)
    if (t.provenance.is_memory_hit()) hits.push_back(&t);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0]->source_begin == s.tokens.size() - 2);
  CHECK(hits[0]->provenance.via_alias);
  CHECK(run.all.total == WordCounts{1, 0, 1, 1});
  CHECK(run.cased_transcript.find("MQM today.") != std::string::npos);

  auto plain = cfg;
  plain.use_aliases = false;
  const auto without = RunScript(plain, corpus.scripts[0], corpus, 0);
  CHECK(without.all.total.tp == 0);
}

TEST_CASE("false positives lead to extended common words") {
  std::vector<std::string> items = {"the", "deaf", "key", "school"};
  for (const auto& w : Filler(24)) items.push_back(w);
  for (const char* w : {"the", "deaf", "key", "school", "again"}) items.push_back(w);
  const auto s = MakeScript(items);
  MemoryStore store;
  store.AddEntry("DFKI", {"deaf key"});
  SessionConfig cfg;
  cfg.policy.jitter = JitterModel::Parse("none");
  StreamSession session(s, cfg, store);
  OperatorAgent agent;
  agent.policy = OperatorAgent::Policy::kAlsoAddExtendedOnFalsePositive;
  OperatorLoop loop(agent, s, {"dfki"});
  session.AddListener(&loop);
  session.RunToEnd();
  const auto& r = session.result();

  std::vector<std::string> added;
  for (const auto& e : loop.events()) {
    CHECK(e.mutation.extended);
    CHECK(e.trigger.rfind("false_positive:dfki@segment", 0) == 0);
    added.push_back(e.mutation.surface);
  }
  CHECK(added == std::vector<std::string>{"deaf", "key"});

  const auto text = r.TranscriptText();
  CHECK(text.rfind("the dfki school", 0) == 0);
  CHECK(text.find("the deaf key school again") != std::string::npos);
  bool suppressed = false;
  for (const auto& d : r.decode_log)
    for (const auto& m : d.matches)
      if (m.entry_normalized == "dfki" && m.suppressed_by_extended) suppressed = true;
  CHECK(suppressed);
}

TEST_CASE("a perfect session needs no corrections") {
  std::vector<std::string> items = {"we", "use", "MQM", "for", "quality"};
  for (const auto& w : Filler(12)) items.push_back(w);
  items.push_back("MQM");
  const auto s = MakeScript(items, [](const std::string& w) { return w == "MQM"; });
  const Corpus corpus = TinyCorpus(s);
  for (const char* a : {"oracle_after_occ", "oracle_ext_after_occ"}) {
    const auto run = RunScript(Config(a), corpus.scripts[0], corpus, 0);
    CHECK(run.operator_events.empty());
    CHECK(run.session.mutation_log.empty());
    CHECK(run.all.recall == 1.0);
  }
  MemoryStore unused;
  const auto base = RunSession(s, SessionConfig{}, unused);
  CHECK(RunOperatorLoop(base, OperatorAgent{}, s, {"mqm"}).empty());
}

TEST_CASE("matrix counting and the memory curve") {
  const Corpus& corpus = RepoCorpus();
  std::vector<ScenarioConfig> cfgs;
  for (const char* a : {"empty", "oracle_ext_before_occ"}) {
    auto c = Config(a);
    c.policy.jitter = JitterModel{};
    for (uint64_t s = 0; s < 16; ++s) c.seeds.push_back(s);
    c.seeds.erase(c.seeds.begin());
    c.scripts = {"rehm_long"};
    cfgs.push_back(c);
  }
  const auto m = RunMatrix(cfgs, corpus);
  CHECK(m.runs.size() == 32);
  CHECK(m.failures.empty());
  std::set<std::string> approaches;
  for (const auto& row : m.rows) {
    approaches.insert(row.approach);
    CHECK(row.summary.n == 16);
  }
  CHECK(approaches.size() == 2);
  CHECK(m.memory_curve.empty());
  const std::string csv = m.AggregateCsv();
  CHECK(csv.rfind("approach,metric,mean,std,n\n", 0) == 0);
  CHECK(csv.find("oracle_ext_before_occ,f1,") != std::string::npos);

  std::vector<ScenarioConfig> sweep;
  for (const char* a : {"empty", "random_memory(100)", "random_memory(0)"}) {
    auto c = Config(a);
    c.seeds = {0, 1};
    c.scripts = {"lecture01"};
    sweep.push_back(c);
  }
  const auto curve = RunMatrix(sweep, corpus);
  REQUIRE(curve.memory_curve.size() == 2);
  CHECK(curve.memory_curve[0].k == 0);
  double empty_wer = -1;
  for (const auto& row : curve.rows)
    if (row.approach == "empty" && row.metric == "wer") empty_wer = row.summary.mean;
  CHECK(curve.memory_curve[0].wer.mean == empty_wer);
  CHECK(curve.CurveCsv().rfind("k,mean_wer,std_wer,n\n0,", 0) == 0);
}

TEST_CASE("failed cells do not stop the matrix") {
  Corpus corpus = RepoCorpus();
  for (auto& s : corpus.scripts) s.slides.reset();
  auto bad = Config("source_curr_slides");
  bad.seeds = {0, 1};
  bad.scripts = {"lecture02"};
  auto good = Config("empty");
  good.scripts = {"lecture02"};
  const auto m = RunMatrix({bad, good}, corpus);
  REQUIRE(m.failures.size() == 2);
  CHECK(m.failures[0].rfind("source_curr_slides seed 0: MissingCorpusInput", 0) == 0);
  CHECK(m.runs.size() == 1);
  CHECK(m.runs[0].approach == "empty");
}

TEST_CASE("source runs report the intersected subset") {
  const Corpus& corpus = RepoCorpus();
  auto c = Config("source_paper");
  c.scripts = {"lecture03"};
  const auto run = RunScenario(c, corpus, 0);
  REQUIRE(run.intersected.has_value());
  CHECK(run.intersected->subset == EvalSubset::kIntersectedWithSource);
  CHECK(run.Metrics().count("src_f1") == 1);
  CHECK(run.ToJson().at("approach") == "source_paper");
}

}

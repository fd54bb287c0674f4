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
#include "membooth/service.h"
#include "test_support.h"

using namespace membooth;
using membooth::testing::RepoCorpus;
using namespace std::chrono_literals;

namespace {

struct Served {
  Server server{RepoCorpus(), ServeOptions{"127.0.0.1", 0}};
  uint16_t port = server.Start();
};

Served& SharedServer() {
  static Served s;
  return s;
}

// Everything the server sends until it closes the connection.
std::vector<ProtocolMessage> Drain(ProtocolClient& c, std::chrono::milliseconds limit = 60s) {
  std::vector<ProtocolMessage> out;
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    auto m = c.Receive(200ms);
    if (m) {
      out.push_back(*m);
    } else if (c.closed()) {
      break;
    }
  }
  return out;
}

std::optional<ProtocolMessage> Await(ProtocolClient& c, MessageKind kind,
                                     std::vector<ProtocolMessage>& log,
                                     std::chrono::milliseconds limit = 30s) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    auto m = c.Receive(100ms);
    if (!m) {
      if (c.closed()) return std::nullopt;
      continue;
    }
    log.push_back(*m);
    if (m->kind == kind) return m;
  }
  return std::nullopt;
}

std::string BatchTranscript(const std::string& script, uint64_t seed,
                            const std::vector<MemoryMutation>& schedule,
                            const std::string& mode = "ship") {
  const Corpus& corpus = RepoCorpus();
  ScenarioConfig cfg;
  cfg.mode = EmissionMode::Parse(mode);
  MemoryStore store;
  const auto r = RunSession(corpus.Find(script)->script, cfg.Session(seed), store, schedule);
  return r.TranscriptText();
}

std::string StableText(const std::vector<ProtocolMessage>& log) {
  std::map<uint64_t, std::vector<std::string>> by_start;
  std::set<uint64_t> retracted;
  std::map<uint64_t, uint64_t> start_of;
  for (const auto& m : log) {
    if (m.kind == MessageKind::kTranscriptRetract)
      retracted.insert(m.payload.at("segment_id").get<uint64_t>());
  }
  for (const auto& m : log) {
    if (m.kind != MessageKind::kTranscriptStable) continue;
    const auto& seg = m.payload.at("segment");
    if (retracted.count(seg.at("segment_id").get<uint64_t>())) continue;
    auto& words = by_start[seg.at("script_span").at(0).get<uint64_t>()];
    for (const auto& t : seg.at("tokens")) words.push_back(t.at("text").get<std::string>());
  }
  std::vector<std::string> all;
  for (auto& [_, words] : by_start) all.insert(all.end(), words.begin(), words.end());
  return Join(all, " ");
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("bind addresses") {
  const auto a = ParseBindAddress("0.0.0.0:9000");
  CHECK(a.host == "0.0.0.0");
  CHECK(a.port == 9000);
  CHECK(ParseBindAddress(":0").host == "127.0.0.1");
  CHECK(ParseBindAddress("8080").port == 8080);
  CHECK_THROWS_AS(ParseBindAddress("host:http"), Error);
  CHECK_THROWS_AS(ParseBindAddress("host:70000"), Error);
}

TEST_CASE("unknown session options are refused") {
  ProtocolClient c;
  c.Connect("127.0.0.1", SharedServer().port);
  c.Send(MessageKind::kSessionStart, {{"script", "lecture01"}, {"volume", 11}});
  auto m = c.Receive(5s);
  REQUIRE(m.has_value());
  CHECK(m->kind == MessageKind::kError);
  CHECK(m->payload.at("code") == "ConfigError");
  CHECK(m->payload.at("message").get<std::string>().find("volume") != std::string::npos);
  c.Send(MessageKind::kSessionStart, {{"script", "nope"}});
  m = c.Receive(5s);
  REQUIRE(m.has_value());
  CHECK(m->kind == MessageKind::kError);
  c.Send(MessageKind::kMemoryAdd, {{"surface", "DFKI"}});
  m = c.Receive(5s);
  REQUIRE(m.has_value());
  CHECK(m->kind == MessageKind::kError);
  // Still usable: a valid start goes through.
  c.Send(MessageKind::kSessionStart, {{"script", "lecture01"}, {"speed", 0}});
  m = c.Receive(5s);
  REQUIRE(m.has_value());
  CHECK(m->kind == MessageKind::kSessionStart);
  CHECK(m->payload.at("script") == "lecture01");
}

TEST_CASE("a silent client sees the empty baseline") {
  for (uint64_t seed : {0, 3}) {
    ProtocolClient c;
    c.Connect("127.0.0.1", SharedServer().port);
    c.Send(MessageKind::kSessionStart,
           {{"script", "lecture02"}, {"seed", seed}, {"speed", 0}});
    const auto log = Drain(c);
    REQUIRE(log.size() > 3);
    CHECK(log.front().kind == MessageKind::kSessionStart);
    CHECK(log[1].kind == MessageKind::kMemoryState);
    CHECK(log.back().kind == MessageKind::kSessionEnd);
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].seq == i + 1);
    for (const auto& m : log) {
      CHECK(m.kind != MessageKind::kTranscriptRetract);
      CHECK(m.kind != MessageKind::kError);
    }
    const std::string batch = BatchTranscript("lecture02", seed, {});
    CHECK(log.back().payload.at("transcript") == batch);
    CHECK(StableText(log) == batch);
    CHECK(c.closed());
  }
}

TEST_CASE("memory_add is acknowledged and replays in batch") {
  const Corpus& corpus = RepoCorpus();
  ProtocolClient c;
  c.Connect("127.0.0.1", SharedServer().port);
  c.Send(MessageKind::kSessionStart, {{"script", "rehm_long"}, {"seed", 2}, {"speed", 2000}});
  std::vector<ProtocolMessage> log;
  REQUIRE(Await(c, MessageKind::kMemoryState, log));  // initial state
  const uint64_t seq = c.Send(MessageKind::kMemoryAdd, {{"surface", "DFKI"}});
  const auto ack = Await(c, MessageKind::kMemoryState, log);
  REQUIRE(ack.has_value());
  CHECK(ack->payload.at("version") == 1);
  CHECK(ack->payload.at("changed") == true);
  CHECK(ack->payload.at("trigger") == "client:" + std::to_string(seq));
  CHECK(ack->payload.at("entries").at(0).at("surface") == "DFKI");
  const int64_t applied = ack->payload.at("applied_at_ms").get<int64_t>();
  for (auto& m : Drain(c)) log.push_back(m);
  REQUIRE(log.back().kind == MessageKind::kSessionEnd);

  std::size_t hits = 0;
  for (const auto& m : log) {
    if (m.kind != MessageKind::kTranscriptStable) continue;
    for (const auto& t : m.payload.at("segment").at("tokens"))
      if (t.at("prov") == "memory_hit" && t.at("entry") == "dfki") ++hits;
  }
  CHECK(hits >= 1);
  for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].seq == i + 1);

  MemoryMutation replay;
  replay.surface = "DFKI";
  replay.at_ms = applied;
  const std::string batch = BatchTranscript("rehm_long", 2, {replay});
  CHECK(log.back().payload.at("transcript") == batch);
  CHECK(StableText(log) == batch);
  CHECK(batch != BatchTranscript("rehm_long", 2, {}));
  (void)corpus;
}

TEST_CASE("retractions only follow a delayed-window re-decode") {
  const Corpus& corpus = RepoCorpus();
  const Script& script = corpus.Find("lecture03")->script;
  ProtocolClient c;
  c.Connect("127.0.0.1", SharedServer().port);
  c.Send(MessageKind::kSessionStart, {{"script", "lecture03"},
                                      {"seed", 1},
                                      {"speed", 400},
                                      {"mode", "delay:60000"}});
  std::vector<ProtocolMessage> log;
  std::string word;
  while (word.empty()) {
    const auto m = Await(c, MessageKind::kTranscriptStable, log);
    REQUIRE(m.has_value());
    for (const auto& t : m->payload.at("segment").at("tokens")) {
      const auto& tok = script.tokens[t.at("src").at(0).get<std::size_t>()];
      if (tok.is_new_word && t.at("prov") == "plain") {
        word = StripPunctuation(tok.ref_surface);
        break;
      }
    }
  }
  nlohmann::json add = {{"surface", word}};
  if (auto it = corpus.aliases.find(NormalizeToken(word)); it != corpus.aliases.end())
    add["aliases"] = it->second;
  c.Send(MessageKind::kMemoryAdd, add);
  for (auto& m : Drain(c)) log.push_back(m);
  REQUIRE(log.back().kind == MessageKind::kSessionEnd);

  std::set<uint64_t> sent;
  std::size_t retracts = 0, superseding = 0;
  for (const auto& m : log) {
    if (m.kind == MessageKind::kTranscriptStable) {
      const auto& seg = m.payload.at("segment");
      sent.insert(seg.at("segment_id").get<uint64_t>());
      superseding += seg.at("status") == "superseded";
    }
    if (m.kind == MessageKind::kTranscriptRetract) {
      ++retracts;
      CHECK(sent.count(m.payload.at("segment_id").get<uint64_t>()) == 1);
    }
  }
  CHECK(retracts >= 1);
  CHECK(superseding == retracts);
  CHECK(StableText(log) == log.back().payload.at("transcript").get<std::string>());
}

TEST_CASE("a malformed frame closes the connection") {
  ProtocolClient c;
  c.Connect("127.0.0.1", SharedServer().port);
  c.SendRaw("7\nnotjson");
  const auto log = Drain(c, 10s);
  REQUIRE(log.size() == 1);
  CHECK(log[0].kind == MessageKind::kError);
  CHECK(log[0].payload.at("code") == "ProtocolError");
  CHECK(c.closed());
}

TEST_CASE("server stops with open connections") {
  Server server(RepoCorpus(), ServeOptions{"127.0.0.1", 0});
  const uint16_t port = server.Start();
  ProtocolClient c;
  c.Connect("127.0.0.1", port);
  c.Send(MessageKind::kSessionStart, {{"script", "rehm_long"}, {"speed", 1}});
  REQUIRE(c.Receive(5s).has_value());
  server.Stop();
  Drain(c, 5s);
  CHECK(c.closed());
}

}

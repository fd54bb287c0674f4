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

#include <random>

#include "doctest.h"
#include "membooth/error.h"
#include "membooth/protocol.h"

using namespace membooth;

namespace {

const MessageKind kAll[] = {
    MessageKind::kSessionStart,  MessageKind::kTranscriptPartial, MessageKind::kTranscriptStable,
    MessageKind::kTranscriptRetract, MessageKind::kMemoryAdd,     MessageKind::kMemoryRemove,
    MessageKind::kMemoryState,   MessageKind::kMetricsUpdate,     MessageKind::kSessionEnd,
    MessageKind::kError};

nlohmann::json RandomValue(std::mt19937_64& rng, int depth) {
  switch (rng() % (depth > 2 ? 4 : 6)) {
    case 0: return static_cast<int64_t>(rng() % 100000) - 50000;
    case 1: return std::string("t\xC3\xA9xt\n\"") + std::to_string(rng() % 99);
    case 2: return rng() % 2 == 0;
    case 3: return nullptr;
    case 4: {
      auto a = nlohmann::json::array();
      for (int i = 0, n = int(rng() % 4); i < n; ++i) a.push_back(RandomValue(rng, depth + 1));
      return a;
    }
    default: {
      auto o = nlohmann::json::object();
      for (int i = 0, n = int(rng() % 4); i < n; ++i)
        o["k" + std::to_string(i)] = RandomValue(rng, depth + 1);
      return o;
    }
  }
}

void ExpectMalformed(std::string_view bytes) {
  try {
    DecodeFrame(bytes);
    FAIL("accepted: " << std::string(bytes));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProtocol);
  }
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("kind names") {
  for (MessageKind k : kAll) CHECK(ParseMessageKind(MessageKindName(k)) == k);
  CHECK(MessageKindName(MessageKind::kTranscriptRetract) == "transcript_retract");
  CHECK_FALSE(ParseMessageKind("hello").has_value());
}

TEST_CASE("frames round trip for every kind") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    ProtocolMessage m;
    m.seq = rng() % 1'000'000;
    m.kind = kAll[rng() % 10];
    m.payload = nlohmann::json::object();
    for (int i = 0, n = int(rng() % 5); i < n; ++i)
      m.payload["f" + std::to_string(i)] = RandomValue(rng, 0);
    const std::string frame = EncodeFrame(m);
    CHECK(DecodeFrame(frame) == m);
  }
}

TEST_CASE("frame layout") {
  ProtocolMessage m{3, MessageKind::kMemoryAdd, {{"surface", "DFKI"}}};
  const std::string frame = EncodeFrame(m);
  const std::string body = R"({"kind":"memory_add","payload":{"surface":"DFKI"},"seq":3})";
  CHECK(frame == std::to_string(body.size()) + "\n" + body);
}

TEST_CASE("reader handles frames split at every byte") {
  std::string stream;
  std::vector<ProtocolMessage> sent;
  for (uint64_t i = 0; i < 20; ++i) {
    ProtocolMessage m{i, kAll[i % 10], {{"i", i}, {"s", std::string(i * 7, 'x')}}};
    sent.push_back(m);
    stream += EncodeFrame(m);
  }
  FrameReader reader;
  std::vector<ProtocolMessage> got;
  for (char c : stream) {
    reader.Feed(std::string_view(&c, 1));
    while (auto m = reader.Next()) got.push_back(*m);
  }
  CHECK(got == sent);
  CHECK(reader.buffered() == 0);

  FrameReader bulk;
  bulk.Feed(stream);
  std::size_t n = 0;
  while (bulk.Next()) ++n;
  CHECK(n == 20);
}

TEST_CASE("malformed frames") {
  ExpectMalformed("");
  ExpectMalformed("abc\n{}");
  ExpectMalformed("\n{}");
  ExpectMalformed("-2\n{}");
  ExpectMalformed("2\n[]");
  ExpectMalformed("3\nxyz");
  ExpectMalformed("5\n{\"a\"");
  ExpectMalformed("123456789012345678901\n");
  ExpectMalformed("99999999999\n{}");
  ExpectMalformed(std::to_string(kMaxFrameBytes + 1) + "\n");
  auto frame = [](const std::string& body) { return std::to_string(body.size()) + "\n" + body; };
  ExpectMalformed(frame(R"({"seq":1,"kind":"nope","payload":{}})"));
  ExpectMalformed(frame(R"({"seq":-1,"kind":"error","payload":{}})"));
  ExpectMalformed(frame(R"({"seq":1.5,"kind":"error","payload":{}})"));
  ExpectMalformed(frame(R"({"kind":"error","payload":{}})"));
  ExpectMalformed(frame(R"({"seq":1,"kind":"error","payload":[]})"));
  ExpectMalformed(frame(R"({"seq":1,"kind":"error","payload":{},"extra":0})"));
  ExpectMalformed(frame(R"({"seq":1,"kind":"error"})") + "7");
  CHECK(DecodeFrame(frame(R"({"seq":1,"kind":"error"})")).payload.empty());
}

TEST_CASE("partial headers wait for more bytes") {
  FrameReader r;
  r.Feed("12");
  CHECK_FALSE(r.Next().has_value());
  FrameReader bad;
  bad.Feed("1x");
  CHECK_THROWS_AS(bad.Next(), Error);
}

TEST_CASE("payload builders") {
  EmittedSegment seg;
  seg.id = 4;
  seg.tokens.push_back({"dfki", 10, 20, 1, 2, {Provenance::Kind::kMemoryHit, "dfki", false, 0}});
  const auto stable = StablePayload(seg, 77);
  CHECK(stable.at("at_ms") == 77);
  CHECK(stable.at("segment").at("segment_id") == 4);
  CHECK(RetractPayload(seg, 90) == nlohmann::json{{"at_ms", 90}, {"segment_id", 4}});
  std::vector<BeamToken> tail = {{"x", 1, 2, 0}};
  CHECK(PartialPayload(tail, 5).at("tokens").size() == 1);
  MemorySnapshot snap({{"DFKI", "dfki", {}, false, 0}}, 6);
  const auto state = MemoryStatePayload(snap, 100, "client:2");
  CHECK(state.at("version") == 6);
  CHECK(state.at("trigger") == "client:2");
  CHECK(ErrorPayload("Config", "bad").at("code") == "Config");
}

TEST_CASE("memory payloads") {
  const auto add = MutationFromPayload(
      MessageKind::kMemoryAdd, {{"surface", "DFKI"}, {"aliases", {"deaf key"}}, {"extended", false}});
  CHECK(add.kind == MemoryMutation::Kind::kAdd);
  CHECK(add.aliases == std::vector<std::string>{"deaf key"});
  const auto rm = MutationFromPayload(MessageKind::kMemoryRemove, {{"surface", "dfki"}});
  CHECK(rm.kind == MemoryMutation::Kind::kRemove);
  CHECK_THROWS_AS(MutationFromPayload(MessageKind::kMemoryAdd, nlohmann::json::object()), Error);
  CHECK_THROWS_AS(MutationFromPayload(MessageKind::kMemoryAdd, {{"surface", 5}}), Error);
  CHECK_THROWS_AS(MutationFromPayload(MessageKind::kError, {{"surface", "x"}}), Error);
  try {
    MutationFromPayload(MessageKind::kMemoryAdd, {{"surface", "!!"}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptySurface);
  }
  try {
    MutationFromPayload(MessageKind::kMemoryAdd, {{"surface", "a b c d e"}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPhraseTooLong);
  }
}

}

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

#include "membooth/protocol.h"

#include <array>
#include <utility>

#include "membooth/error.h"
#include "membooth/session_log.h"
#include "membooth/text.h"

namespace membooth {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 10> kKinds = {{
    {MessageKind::kSessionStart, "session_start"},
    {MessageKind::kTranscriptPartial, "transcript_partial"},
    {MessageKind::kTranscriptStable, "transcript_stable"},
    {MessageKind::kTranscriptRetract, "transcript_retract"},
    {MessageKind::kMemoryAdd, "memory_add"},
    {MessageKind::kMemoryRemove, "memory_remove"},
    {MessageKind::kMemoryState, "memory_state"},
    {MessageKind::kMetricsUpdate, "metrics_update"},
    {MessageKind::kSessionEnd, "session_end"},
    {MessageKind::kError, "error"},
}};

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kProtocol, "malformed frame: " + what);
}

}  // namespace

std::string_view MessageKindName(MessageKind kind) {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "error";
}

std::optional<MessageKind> ParseMessageKind(std::string_view name) {
  for (const auto& [k, n] : kKinds)
    if (n == name) return k;
  return std::nullopt;
}

nlohmann::json ProtocolMessage::ToJson() const {
  return {{"seq", seq}, {"kind", MessageKindName(kind)}, {"payload", payload}};
}

ProtocolMessage ProtocolMessage::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) Malformed("message is not an object");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned())
    Malformed("seq must be a non-negative integer");
  if (!j.contains("kind") || !j["kind"].is_string()) Malformed("kind must be a string");
  const auto kind = ParseMessageKind(j["kind"].get<std::string>());
  if (!kind) Malformed("unknown kind '" + j["kind"].get<std::string>() + "'");
  ProtocolMessage m;
  m.seq = j["seq"].get<uint64_t>();
  m.kind = *kind;
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) Malformed("payload must be an object");
    m.payload = j["payload"];
  }
  for (const auto& [key, _] : j.items())
    if (key != "seq" && key != "kind" && key != "payload")
      Malformed("unexpected field '" + key + "'");
  return m;
}

std::string EncodeFrame(const ProtocolMessage& message) {
  const std::string body = message.ToJson().dump();
  return std::to_string(body.size()) + "\n" + body;
}

ProtocolMessage DecodeFrame(std::string_view frame) {
  FrameReader reader;
  reader.Feed(frame);
  auto m = reader.Next();
  if (!m) Malformed("incomplete frame");
  if (reader.buffered() != 0) Malformed("trailing bytes after frame");
  return *m;
}

void FrameReader::Feed(std::string_view bytes) {
  if (pos_ > 0 && pos_ * 2 > buffer_.size()) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<ProtocolMessage> FrameReader::Next() {
  const std::size_t nl = buffer_.find('\n', pos_);
  if (nl == std::string::npos) {
    if (buffered() > 20) Malformed("length header too long");
    for (std::size_t i = pos_; i < buffer_.size(); ++i)
      if (buffer_[i] < '0' || buffer_[i] > '9') Malformed("length header is not decimal");
    return std::nullopt;
  }
  if (nl == pos_ || nl - pos_ > 20) Malformed("bad length header");
  std::size_t len = 0;
  for (std::size_t i = pos_; i < nl; ++i) {
    const char c = buffer_[i];
    if (c < '0' || c > '9') Malformed("length header is not decimal");
    len = len * 10 + static_cast<std::size_t>(c - '0');
    if (len > kMaxFrameBytes) Malformed("frame exceeds size limit");
  }
  if (buffer_.size() - (nl + 1) < len) return std::nullopt;
  const std::string_view body(buffer_.data() + nl + 1, len);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    Malformed(std::string("body is not JSON: ") + e.what());
  }
  pos_ = nl + 1 + len;
  return ProtocolMessage::FromJson(j);
}

nlohmann::json StablePayload(const EmittedSegment& segment, int64_t at_ms) {
  return {{"at_ms", at_ms}, {"segment", ToJson(segment)}};
}

nlohmann::json RetractPayload(const EmittedSegment& segment, int64_t at_ms) {
  return {{"at_ms", at_ms}, {"segment_id", segment.id}};
}

nlohmann::json PartialPayload(std::span<const BeamToken> tail, int64_t at_ms) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : tail)
    tokens.push_back({{"text", t.text}, {"start_ms", t.start_ms}, {"end_ms", t.end_ms}});
  return {{"at_ms", at_ms}, {"tokens", tokens}};
}

nlohmann::json MemoryStatePayload(const MemorySnapshot& snapshot, int64_t at_ms,
                                  const std::string& trigger) {
  nlohmann::json j = ToJson(snapshot);
  j["applied_at_ms"] = at_ms;
  j["trigger"] = trigger;
  return j;
}

nlohmann::json ErrorPayload(std::string_view code, std::string_view message) {
  return {{"code", code}, {"message", message}};
}

MemoryMutation MutationFromPayload(MessageKind kind, const nlohmann::json& payload) {
  MemoryMutation m;
  try {
    if (kind == MessageKind::kMemoryAdd) {
      m.kind = MemoryMutation::Kind::kAdd;
      m.surface = payload.at("surface").get<std::string>();
      m.aliases = payload.value("aliases", std::vector<std::string>{});
      m.extended = payload.value("extended", false);
    } else if (kind == MessageKind::kMemoryRemove) {
      m.kind = MemoryMutation::Kind::kRemove;
      m.surface = payload.at("surface").get<std::string>();
    } else {
      throw Error(ErrorCode::kProtocol, "not a memory message");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("bad memory payload: ") + e.what());
  }
  const std::string normalized = NormalizePhrase(m.surface);
  if (normalized.empty())
    throw Error(ErrorCode::kEmptySurface, "memory entry has no words");
  if (SplitWhitespace(normalized).size() > kMaxPhraseWords)
    throw Error(ErrorCode::kPhraseTooLong, "memory entry has too many words");
  return m;
}

}  // namespace membooth

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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "membooth/memory_store.h"
#include "membooth/stream_worker.h"

namespace membooth {

enum class MessageKind {
  kSessionStart,
  kTranscriptPartial,
  kTranscriptStable,
  kTranscriptRetract,
  kMemoryAdd,
  kMemoryRemove,
  kMemoryState,
  kMetricsUpdate,
  kSessionEnd,
  kError,
};

std::string_view MessageKindName(MessageKind kind);
std::optional<MessageKind> ParseMessageKind(std::string_view name);

struct ProtocolMessage {
  uint64_t seq = 0;
  MessageKind kind = MessageKind::kError;
  nlohmann::json payload = nlohmann::json::object();

  nlohmann::json ToJson() const;
  /// Throws Error(kProtocol) on a missing or mistyped field.
  static ProtocolMessage FromJson(const nlohmann::json& j);
  bool operator==(const ProtocolMessage&) const = default;
};

/// Frames larger than this are rejected as malformed.
inline constexpr std::size_t kMaxFrameBytes = 16 << 20;

/// "<decimal byte length>\n<json>".
std::string EncodeFrame(const ProtocolMessage& message);
/// Decodes exactly one complete frame. Throws Error(kProtocol).
ProtocolMessage DecodeFrame(std::string_view frame);

/// Incremental decoder for a byte stream.
class FrameReader {
 public:
  void Feed(std::string_view bytes);
  /// Next complete frame, nullopt if more bytes are needed. Throws
  /// Error(kProtocol) on malformed input; the reader is unusable after.
  std::optional<ProtocolMessage> Next();
  std::size_t buffered() const { return buffer_.size() - pos_; }

 private:
  std::string buffer_;
  std::size_t pos_ = 0;
};

// Payload builders shared by the service and its tests.
nlohmann::json StablePayload(const EmittedSegment& segment, int64_t at_ms);
nlohmann::json RetractPayload(const EmittedSegment& segment, int64_t at_ms);
nlohmann::json PartialPayload(std::span<const BeamToken> tail, int64_t at_ms);
nlohmann::json MemoryStatePayload(const MemorySnapshot& snapshot, int64_t at_ms,
                                  const std::string& trigger);
nlohmann::json ErrorPayload(std::string_view code, std::string_view message);

/// Client side memory_add/memory_remove payload to a mutation (time unset).
MemoryMutation MutationFromPayload(MessageKind kind, const nlohmann::json& payload);

}  // namespace membooth

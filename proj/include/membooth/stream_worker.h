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
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "membooth/memory_decoder.h"
#include "membooth/memory_store.h"
#include "membooth/sim_recognizer.h"

namespace membooth {

/// Network delay applied to each audio packet.
struct JitterModel {
  enum class Kind { kNone, kUniform };
  Kind kind = Kind::kUniform;
  int64_t min_delay_ms = 0;
  int64_t max_delay_ms = 150;
  int64_t packet_ms = 100;

  /// "none", "uniform:MIN:MAX" or "uniform:MIN:MAX:PACKET".
  static JitterModel Parse(std::string_view spec);
  std::string ToString() const;
  void Validate() const;
};

struct ChunkPolicy {
  int64_t min_chunk_ms = 1000;
  JitterModel jitter;
  std::size_t n_best = kDefaultNBest;
  std::size_t max_divergence = kDefaultMaxDivergence;
  /// Consecutive chunks with an empty common prefix before the first word
  /// is emitted anyway.
  std::size_t stall_chunks = 3;

  void Validate() const;
};

struct EmissionMode {
  enum class Kind { kShipImmediately, kDelayedWindow };
  Kind kind = Kind::kShipImmediately;
  int64_t window_ms = 0;

  /// "ship" or "delay:<ms>".
  static EmissionMode Parse(std::string_view spec);
  std::string ToString() const;
};

struct SessionConfig {
  ChunkPolicy policy;
  double theta = kDefaultTheta;
  EmissionMode mode;
  uint64_t seed = 0;
};

struct StableSplit {
  std::vector<BeamToken> stable;
  std::vector<BeamToken> tail;
};

/// Longest common word prefix of all beams; the rest of the top beam is
/// the tail.
StableSplit DetectStable(const HypothesisBeam& beam);
std::size_t CommonPrefixLength(const HypothesisBeam& beam);

enum class SegmentStatus { kStable, kRetracted, kSuperseded };
const char* SegmentStatusName(SegmentStatus status);

/// kSuperseded marks the replacement emitted after a retraction; the
/// retracted original keeps its id and switches to kRetracted.
struct EmittedSegment {
  uint64_t id = 0;
  std::vector<DecodedToken> tokens;
  SegmentStatus status = SegmentStatus::kStable;
  int64_t wall_emit_ms = 0;
  int64_t retracted_at_ms = -1;
  std::size_t script_begin = 0;
  std::size_t script_end = 0;
  uint64_t snapshot_version = 0;
  std::optional<uint64_t> supersedes;
  bool forced = false;

  bool operator==(const EmittedSegment&) const = default;
};

struct MemoryMutation {
  enum class Kind { kAdd, kRemove };
  Kind kind = Kind::kAdd;
  int64_t at_ms = 0;
  std::string surface;  // normalized form for removals
  std::vector<std::string> aliases;
  bool extended = false;
  std::string trigger;  // why it was scheduled, for the logs

  bool operator==(const MemoryMutation&) const = default;
};

struct AppliedMutation {
  MemoryMutation mutation;
  int64_t applied_at_ms = 0;
  uint64_t version_after = 0;
  bool changed = false;
  std::string error;
};

/// One decode step, for the decode log.
struct DecodeRecord {
  uint64_t chunk = 0;
  int64_t at_ms = 0;
  uint64_t snapshot_version = 0;
  double theta = 0.0;
  std::size_t slice_begin = 0;
  std::size_t slice_end = 0;
  std::size_t stable_words = 0;
  bool forced = false;
  bool flush = false;
  bool redecode = false;
  std::vector<MemoryMatch> matches;
  std::optional<uint64_t> segment;
};

class StreamSession;

class SessionListener {
 public:
  virtual ~SessionListener() = default;
  virtual void OnSegment(const EmittedSegment& /*segment*/,
                         StreamSession& /*session*/) {}
  virtual void OnRetract(const EmittedSegment& /*retracted*/,
                         StreamSession& /*session*/) {}
  virtual void OnPartial(std::span<const BeamToken> /*tail*/,
                         StreamSession& /*session*/) {}
  virtual void OnMutation(const AppliedMutation& /*applied*/,
                          StreamSession& /*session*/) {}
};

struct SessionResult {
  std::vector<EmittedSegment> segments;
  std::vector<DecodeRecord> decode_log;
  std::vector<AppliedMutation> mutation_log;
  std::map<uint64_t, std::shared_ptr<const MemorySnapshot>> snapshots;

  /// Segments that were not retracted, in script order.
  std::vector<const EmittedSegment*> LiveSegments() const;
  std::vector<DecodedToken> Transcript() const;
  /// Normalized words of the transcript joined by single spaces.
  std::string TranscriptText() const;
};

/// Online decoding loop driven by simulated time. Packets of script audio
/// arrive with jitter; once the buffered audio reaches the minimum chunk
/// the chunk is decoded against a fresh memory snapshot, the stable prefix
/// is emitted and its audio is cut from the buffer.
class StreamSession {
 public:
  StreamSession(const Script& script, SessionConfig config, MemoryStore& store);

  /// Only valid before the first Step().
  void SetSeed(uint64_t seed);
  void AddListener(SessionListener* listener);

  /// Queues a memory mutation; times earlier than now() are clamped.
  void Schedule(MemoryMutation mutation);

  std::optional<int64_t> NextEventTime() const;
  /// Processes the next event; returns false once the session is over.
  bool Step();
  void RunToEnd();

  bool finished() const { return finished_; }
  int64_t now() const { return now_; }
  const SessionConfig& config() const { return config_; }
  const Script& script() const { return script_; }
  MemoryStore& store() { return store_; }
  const SessionResult& result() const { return result_; }
  SessionResult TakeResult() { return std::move(result_); }

 private:
  struct PendingMutation {
    MemoryMutation mutation;
    uint64_t seq;
    bool operator>(const PendingMutation& o) const {
      if (mutation.at_ms != o.mutation.at_ms)
        return mutation.at_ms > o.mutation.at_ms;
      return seq > o.seq;
    }
  };

  void Start();
  void ApplyMutation(const MemoryMutation& mutation);
  void ArrivePackets(int64_t at_ms);
  void Decode(bool flush);
  void Redecode(uint64_t segment_id);
  const Matcher& MatcherFor(std::shared_ptr<const MemorySnapshot> snapshot);
  int64_t AvailableAudioMs() const;
  int64_t CutMs() const;
  // Segment ids double as indices into result_.segments.
  uint64_t Emit(std::vector<DecodedToken> tokens, std::size_t begin,
                std::size_t end, uint64_t version, bool forced);

  const Script& script_;
  SessionConfig config_;
  MemoryStore& store_;
  std::vector<SessionListener*> listeners_;

  bool stepped_ = false;
  bool audio_done_ = false;
  bool finished_ = false;
  int64_t now_ = 0;

  std::vector<int64_t> arrival_ms_;           // per packet
  std::vector<std::size_t> arrival_order_;     // packets by arrival
  std::size_t next_arrival_ = 0;
  std::vector<bool> arrived_;
  std::size_t contiguous_ = 0;

  std::size_t cut_ = 0;  // first script token not yet emitted
  int64_t last_decode_avail_ms_ = -1;
  std::size_t stall_ = 0;
  uint64_t next_chunk_ = 0;
  uint64_t next_seq_ = 0;

  std::priority_queue<PendingMutation, std::vector<PendingMutation>,
                      std::greater<>>
      mutations_;
  std::vector<uint64_t> pending_;  // delayed mode: segments still revisable
  std::optional<Matcher> matcher_;

  SessionResult result_;
};

SessionResult RunSession(const Script& script, const SessionConfig& config,
                         MemoryStore& store,
                         std::vector<MemoryMutation> schedule = {},
                         std::span<SessionListener* const> listeners = {});

}  // namespace membooth

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

#include "membooth/stream_worker.h"

#include <algorithm>
#include <random>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/text.h"

namespace membooth {

JitterModel JitterModel::Parse(std::string_view spec) {
  JitterModel j;
  if (spec == "none") {
    j.kind = Kind::kNone;
    j.max_delay_ms = 0;
    return j;
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.emplace_back(spec.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts[0] != "uniform" || (parts.size() != 3 && parts.size() != 4))
    throw Error(ErrorCode::kConfig,
                "jitter must be 'none' or 'uniform:MIN:MAX[:PACKET]', got '" +
                    std::string(spec) + "'");
  try {
    j.kind = Kind::kUniform;
    j.min_delay_ms = ParseInt(parts[1], "jitter min");
    j.max_delay_ms = ParseInt(parts[2], "jitter max");
    if (parts.size() == 4) j.packet_ms = ParseInt(parts[3], "packet ms");
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  j.Validate();
  return j;
}

std::string JitterModel::ToString() const {
  if (kind == Kind::kNone) return "none";
  std::string out = "uniform:" + std::to_string(min_delay_ms) + ":" +
                    std::to_string(max_delay_ms);
  if (packet_ms != 100) out += ":" + std::to_string(packet_ms);
  return out;
}

void JitterModel::Validate() const {
  if (min_delay_ms < 0 || max_delay_ms < min_delay_ms)
    throw Error(ErrorCode::kConfig, "jitter delays must satisfy 0 <= min <= max");
  if (packet_ms <= 0)
    throw Error(ErrorCode::kConfig, "packet duration must be positive");
}

void ChunkPolicy::Validate() const {
  if (min_chunk_ms <= 0)
    throw Error(ErrorCode::kConfig, "min_chunk_ms must be positive");
  if (n_best == 0) throw Error(ErrorCode::kConfig, "n_best must be >= 1");
  jitter.Validate();
}

EmissionMode EmissionMode::Parse(std::string_view spec) {
  EmissionMode m;
  if (spec == "ship") return m;
  if (spec.rfind("delay:", 0) == 0) {
    m.kind = Kind::kDelayedWindow;
    try {
      m.window_ms = ParseInt(spec.substr(6), "delay window");
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
    if (m.window_ms < 0)
      throw Error(ErrorCode::kConfig, "delay window must be >= 0");
    return m;
  }
  throw Error(ErrorCode::kConfig,
              "mode must be 'ship' or 'delay:<ms>', got '" + std::string(spec) +
                  "'");
}

std::string EmissionMode::ToString() const {
  return kind == Kind::kShipImmediately ? "ship"
                                        : "delay:" + std::to_string(window_ms);
}

std::size_t CommonPrefixLength(const HypothesisBeam& beam) {
  if (beam.beams.empty()) return 0;
  std::size_t n = beam.top().size();
  for (const auto& b : beam.beams) {
    std::size_t k = 0;
    while (k < n && k < b.size() && b[k].text == beam.top()[k].text) ++k;
    n = k;
  }
  return n;
}

StableSplit DetectStable(const HypothesisBeam& beam) {
  StableSplit split;
  if (beam.empty()) return split;
  const std::size_t n = CommonPrefixLength(beam);
  const auto& top = beam.top();
  split.stable.assign(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(n));
  split.tail.assign(top.begin() + static_cast<std::ptrdiff_t>(n), top.end());
  return split;
}

const char* SegmentStatusName(SegmentStatus status) {
  switch (status) {
    case SegmentStatus::kStable: return "stable";
    case SegmentStatus::kRetracted: return "retracted";
    case SegmentStatus::kSuperseded: return "superseded";
  }
  return "stable";
}

std::vector<const EmittedSegment*> SessionResult::LiveSegments() const {
  std::vector<const EmittedSegment*> out;
  for (const auto& s : segments)
    if (s.status != SegmentStatus::kRetracted) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [](const EmittedSegment* a, const EmittedSegment* b) {
                     return a->script_begin < b->script_begin;
                   });
  return out;
}

std::vector<DecodedToken> SessionResult::Transcript() const {
  std::vector<DecodedToken> out;
  for (const EmittedSegment* s : LiveSegments())
    out.insert(out.end(), s->tokens.begin(), s->tokens.end());
  return out;
}

std::string SessionResult::TranscriptText() const {
  std::string out;
  for (const auto& t : Transcript()) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

StreamSession::StreamSession(const Script& script, SessionConfig config,
                             MemoryStore& store)
    : script_(script), config_(std::move(config)), store_(store) {
  config_.policy.Validate();
  if (!(config_.theta > 0.0 && config_.theta <= 1.0))
    throw Error(ErrorCode::kInvalidThreshold,
                "theta must lie in (0, 1], got " +
                    std::to_string(config_.theta));
  Start();
}

void StreamSession::SetSeed(uint64_t seed) {
  if (stepped_)
    throw Error(ErrorCode::kConfig, "seed must be set before the session runs");
  config_.seed = seed;
  Start();
}

void StreamSession::AddListener(SessionListener* listener) {
  listeners_.push_back(listener);
}

void StreamSession::Schedule(MemoryMutation mutation) {
  mutation.at_ms = std::max(mutation.at_ms, now_);
  mutations_.push({std::move(mutation), next_seq_++});
}

void StreamSession::Start() {
  const JitterModel& j = config_.policy.jitter;
  const int64_t duration = script_.duration_ms();
  const auto packets =
      static_cast<std::size_t>((duration + j.packet_ms - 1) / j.packet_ms);
  std::mt19937_64 rng(config_.seed);
  arrival_ms_.resize(packets);
  for (std::size_t p = 0; p < packets; ++p) {
    const int64_t sent =
        std::min(static_cast<int64_t>(p + 1) * j.packet_ms, duration);
    int64_t delay = 0;
    if (j.kind == JitterModel::Kind::kUniform) {
      const auto span = static_cast<uint64_t>(j.max_delay_ms - j.min_delay_ms + 1);
      delay = j.min_delay_ms + static_cast<int64_t>(rng() % span);
    }
    arrival_ms_[p] = sent + delay;
  }
  arrival_order_.resize(packets);
  for (std::size_t p = 0; p < packets; ++p) arrival_order_[p] = p;
  std::stable_sort(arrival_order_.begin(), arrival_order_.end(),
                   [this](std::size_t a, std::size_t b) {
                     return arrival_ms_[a] < arrival_ms_[b];
                   });
  arrived_.assign(packets, false);
  audio_done_ = finished_ = packets == 0;
}

std::optional<int64_t> StreamSession::NextEventTime() const {
  if (finished_) return std::nullopt;
  std::optional<int64_t> next;
  if (!mutations_.empty()) next = mutations_.top().mutation.at_ms;
  if (next_arrival_ < arrival_order_.size()) {
    const int64_t a = arrival_ms_[arrival_order_[next_arrival_]];
    next = next ? std::min(*next, a) : a;
  }
  return next;
}

bool StreamSession::Step() {
  stepped_ = true;
  if (finished_) return false;

  const bool have_packet = next_arrival_ < arrival_order_.size();
  const bool have_mutation = !mutations_.empty();
  if (have_mutation &&
      (!have_packet || mutations_.top().mutation.at_ms <=
                           arrival_ms_[arrival_order_[next_arrival_]])) {
    const MemoryMutation m = mutations_.top().mutation;
    mutations_.pop();
    now_ = std::max(now_, m.at_ms);
    ApplyMutation(m);
  } else if (have_packet) {
    ArrivePackets(arrival_ms_[arrival_order_[next_arrival_]]);
  }

  if (audio_done_) {
    // Stay alive only while a delayed-window segment can still be revised
    // by an already queued mutation.
    bool revisable = false;
    if (config_.mode.kind == EmissionMode::Kind::kDelayedWindow &&
        !mutations_.empty()) {
      const int64_t next = mutations_.top().mutation.at_ms;
      for (uint64_t id : pending_) {
        const EmittedSegment& s = result_.segments[id];
        if (s.status == SegmentStatus::kStable &&
            next <= s.wall_emit_ms + config_.mode.window_ms)
          revisable = true;
      }
    }
    if (!revisable) finished_ = true;
  }
  return !finished_;
}

void StreamSession::RunToEnd() {
  while (Step()) {
  }
}

void StreamSession::ApplyMutation(const MemoryMutation& m) {
  AppliedMutation applied;
  applied.mutation = m;
  applied.applied_at_ms = now_;
  const uint64_t before = store_.version();
  try {
    if (m.kind == MemoryMutation::Kind::kAdd) {
      store_.AddEntry(m.surface, m.aliases, m.extended, now_);
    } else {
      store_.RemoveEntry(m.surface);
    }
  } catch (const Error& e) {
    applied.error = e.what();
  }
  applied.version_after = store_.version();
  applied.changed = applied.version_after != before;
  result_.mutation_log.push_back(applied);
  for (auto* l : listeners_) l->OnMutation(applied, *this);

  if (!applied.changed ||
      config_.mode.kind != EmissionMode::Kind::kDelayedWindow)
    return;
  const int64_t window = config_.mode.window_ms;
  std::vector<uint64_t> still_open;
  for (uint64_t id : pending_) {
    if (result_.segments[id].wall_emit_ms + window >= now_)
      still_open.push_back(id);
  }
  pending_ = still_open;
  for (uint64_t id : still_open) {
    if (result_.segments[id].status == SegmentStatus::kStable) Redecode(id);
  }
}

int64_t StreamSession::AvailableAudioMs() const {
  return std::min(static_cast<int64_t>(contiguous_) *
                      config_.policy.jitter.packet_ms,
                  script_.duration_ms());
}

int64_t StreamSession::CutMs() const {
  return cut_ == 0 ? 0 : script_.tokens[cut_ - 1].end_ms;
}

void StreamSession::ArrivePackets(int64_t at_ms) {
  now_ = std::max(now_, at_ms);
  while (next_arrival_ < arrival_order_.size() &&
         arrival_ms_[arrival_order_[next_arrival_]] == at_ms) {
    arrived_[arrival_order_[next_arrival_]] = true;
    ++next_arrival_;
  }
  while (contiguous_ < arrived_.size() && arrived_[contiguous_]) ++contiguous_;

  if (contiguous_ == arrived_.size()) {
    Decode(/*flush=*/true);
    audio_done_ = true;
    return;
  }
  const int64_t avail = AvailableAudioMs();
  if (avail > last_decode_avail_ms_ &&
      avail - CutMs() >= config_.policy.min_chunk_ms)
    Decode(/*flush=*/false);
}

const Matcher& StreamSession::MatcherFor(
    std::shared_ptr<const MemorySnapshot> snapshot) {
  if (!matcher_ || matcher_->snapshot().version() != snapshot->version()) {
    result_.snapshots.emplace(snapshot->version(), snapshot);
    matcher_.emplace(std::move(snapshot), config_.theta);
  }
  return *matcher_;
}

uint64_t StreamSession::Emit(std::vector<DecodedToken> tokens,
                             std::size_t begin, std::size_t end,
                             uint64_t version, bool forced) {
  EmittedSegment seg;
  seg.id = result_.segments.size();
  seg.tokens = std::move(tokens);
  seg.wall_emit_ms = now_;
  seg.script_begin = begin;
  seg.script_end = end;
  seg.snapshot_version = version;
  seg.forced = forced;
  result_.segments.push_back(std::move(seg));
  return result_.segments.back().id;
}

namespace {

// Moves the emission point back so it neither splits the words decoded
// from one script token nor cuts through a memory match.
std::size_t SettleDown(std::size_t stable, std::span<const BeamToken> top,
                       std::span<const MemoryMatch> matches) {
  bool changed = true;
  while (changed && stable > 0) {
    changed = false;
    while (stable > 0 && stable < top.size() &&
           top[stable].source == top[stable - 1].source) {
      --stable;
      changed = true;
    }
    for (const auto& m : matches) {
      if (m.begin < stable && stable < m.end) {
        stable = m.begin;
        changed = true;
      }
    }
  }
  return stable;
}

std::size_t SettleUp(std::size_t stable, std::span<const BeamToken> top,
                     std::span<const MemoryMatch> matches) {
  bool changed = true;
  while (changed) {
    changed = false;
    while (stable > 0 && stable < top.size() &&
           top[stable].source == top[stable - 1].source) {
      ++stable;
      changed = true;
    }
    for (const auto& m : matches) {
      if (m.begin < stable && stable < m.end) {
        stable = m.end;
        changed = true;
      }
    }
  }
  return stable;
}

}  // namespace

void StreamSession::Decode(bool flush) {
  const int64_t avail = AvailableAudioMs();
  std::size_t end = cut_;
  if (flush) {
    end = script_.tokens.size();
  } else {
    while (end < script_.tokens.size() && script_.tokens[end].end_ms <= avail)
      ++end;
  }
  last_decode_avail_ms_ = avail;
  if (end == cut_) return;

  const std::span<const ScriptToken> slice(script_.tokens.data() + cut_,
                                           end - cut_);
  auto snapshot = store_.Snapshot();
  const uint64_t version = snapshot->version();
  const Matcher& matcher = MatcherFor(std::move(snapshot));
  const HypothesisBeam beam = RecognizeChunk(
      slice, config_.policy.n_best, ChunkDivergenceSeed(slice, cut_),
      config_.policy.max_divergence, cut_);
  const auto& top = beam.top();
  const std::vector<MemoryMatch> matches = matcher.Match(top);

  std::size_t stable = flush ? top.size() : CommonPrefixLength(beam);
  stable = SettleDown(stable, top, matches);
  bool forced = false;
  if (!flush && stable == 0) {
    if (++stall_ >= config_.policy.stall_chunks) {
      forced = true;
      stable = SettleUp(1, top, matches);
    }
  }

  DecodeRecord rec;
  rec.chunk = next_chunk_++;
  rec.at_ms = now_;
  rec.snapshot_version = version;
  rec.theta = config_.theta;
  rec.slice_begin = cut_;
  rec.slice_end = end;
  rec.stable_words = stable;
  rec.forced = forced;
  rec.flush = flush;
  rec.matches = matches;

  const std::span<const BeamToken> tail(top.data() + stable,
                                        top.size() - stable);
  if (stable == 0) {
    result_.decode_log.push_back(std::move(rec));
    for (auto* l : listeners_) l->OnPartial(tail, *this);
    return;
  }
  stall_ = 0;

  std::vector<MemoryMatch> inside;
  for (const auto& m : matches)
    if (m.end <= stable) inside.push_back(m);
  auto tokens = ApplyMatches(
      std::span<const BeamToken>(top.data(), stable), inside,
      matcher.snapshot());
  const std::size_t new_cut = top[stable - 1].source + 1;
  const uint64_t id = Emit(std::move(tokens), cut_, new_cut, version, forced);
  cut_ = new_cut;
  rec.segment = id;
  result_.decode_log.push_back(std::move(rec));

  if (config_.mode.kind == EmissionMode::Kind::kDelayedWindow)
    pending_.push_back(id);
  for (auto* l : listeners_) l->OnSegment(result_.segments[id], *this);
  for (auto* l : listeners_) l->OnPartial(tail, *this);
}

void StreamSession::Redecode(uint64_t segment_id) {
  const EmittedSegment original = result_.segments[segment_id];
  const std::span<const ScriptToken> slice(
      script_.tokens.data() + original.script_begin,
      original.script_end - original.script_begin);
  auto snapshot = store_.Snapshot();
  const uint64_t version = snapshot->version();
  const Matcher& matcher = MatcherFor(std::move(snapshot));
  const HypothesisBeam beam =
      RecognizeChunk(slice, 1, 0, 0, original.script_begin);
  const std::vector<MemoryMatch> matches = matcher.Match(beam.top());
  auto tokens = ApplyMatches(beam.top(), matches, matcher.snapshot());

  DecodeRecord rec;
  rec.chunk = next_chunk_++;
  rec.at_ms = now_;
  rec.snapshot_version = version;
  rec.theta = config_.theta;
  rec.slice_begin = original.script_begin;
  rec.slice_end = original.script_end;
  rec.stable_words = beam.top().size();
  rec.redecode = true;
  rec.matches = matches;

  if (tokens == original.tokens) {
    result_.decode_log.push_back(std::move(rec));
    return;
  }
  result_.segments[segment_id].status = SegmentStatus::kRetracted;
  result_.segments[segment_id].retracted_at_ms = now_;
  for (auto* l : listeners_) l->OnRetract(result_.segments[segment_id], *this);

  const uint64_t id = Emit(std::move(tokens), original.script_begin,
                           original.script_end, version, original.forced);
  result_.segments[id].status = SegmentStatus::kSuperseded;
  result_.segments[id].supersedes = segment_id;
  rec.segment = id;
  result_.decode_log.push_back(std::move(rec));
  for (auto* l : listeners_) l->OnSegment(result_.segments[id], *this);
}

SessionResult RunSession(const Script& script, const SessionConfig& config,
                         MemoryStore& store,
                         std::vector<MemoryMutation> schedule,
                         std::span<SessionListener* const> listeners) {
  StreamSession session(script, config, store);
  for (auto* l : listeners) session.AddListener(l);
  for (auto& m : schedule) session.Schedule(std::move(m));
  session.RunToEnd();
  return session.TakeResult();
}

}  // namespace membooth

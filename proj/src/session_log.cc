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

#include "membooth/session_log.h"

namespace membooth {

using nlohmann::json;

json ToJson(const DecodedToken& t) {
  json j = {{"text", t.text},
            {"start_ms", t.start_ms},
            {"end_ms", t.end_ms},
            {"src", {t.source_begin, t.source_end}}};
  if (t.provenance.is_memory_hit()) {
    j["prov"] = "memory_hit";
    j["entry"] = t.provenance.entry;
    j["via_alias"] = t.provenance.via_alias;
    j["entry_word"] = t.provenance.entry_word;
  } else {
    j["prov"] = "plain";
  }
  return j;
}

DecodedToken DecodedTokenFromJson(const json& j) {
  DecodedToken t;
  t.text = j.at("text").get<std::string>();
  t.start_ms = j.at("start_ms").get<int64_t>();
  t.end_ms = j.at("end_ms").get<int64_t>();
  t.source_begin = j.at("src").at(0).get<std::size_t>();
  t.source_end = j.at("src").at(1).get<std::size_t>();
  if (j.at("prov") == "memory_hit") {
    t.provenance.kind = Provenance::Kind::kMemoryHit;
    t.provenance.entry = j.at("entry").get<std::string>();
    t.provenance.via_alias = j.at("via_alias").get<bool>();
    t.provenance.entry_word = j.at("entry_word").get<std::size_t>();
  }
  return t;
}

json ToJson(const EmittedSegment& s) {
  json tokens = json::array();
  for (const auto& t : s.tokens) tokens.push_back(ToJson(t));
  json j = {{"segment_id", s.id},
            {"status", SegmentStatusName(s.status)},
            {"wall_emit_ms", s.wall_emit_ms},
            {"script_span", {s.script_begin, s.script_end}},
            {"snapshot_version", s.snapshot_version},
            {"forced", s.forced},
            {"tokens", tokens}};
  if (s.retracted_at_ms >= 0) j["retracted_at_ms"] = s.retracted_at_ms;
  if (s.supersedes) j["supersedes"] = *s.supersedes;
  return j;
}

json ToJson(const MemoryMatch& m) {
  json j = {{"entry", m.entry_normalized},
            {"span", {m.begin, m.end}},
            {"score", m.score},
            {"via_alias", m.via_alias},
            {"suppressed", m.suppressed_by_extended}};
  if (m.suppressed_by_extended) j["suppressor"] = m.suppressor;
  return j;
}

json ToJson(const DecodeRecord& r) {
  json matches = json::array();
  json suppressions = json::array();
  for (const auto& m : r.matches) {
    matches.push_back(ToJson(m));
    if (m.suppressed_by_extended) suppressions.push_back(ToJson(m));
  }
  json j = {{"chunk", r.chunk},
            {"at_ms", r.at_ms},
            {"snapshot_version", r.snapshot_version},
            {"theta", r.theta},
            {"slice", {r.slice_begin, r.slice_end}},
            {"stable_words", r.stable_words},
            {"forced", r.forced},
            {"flush", r.flush},
            {"redecode", r.redecode},
            {"matches", matches},
            {"suppressions", suppressions}};
  j["segment"] = r.segment ? json(*r.segment) : json(nullptr);
  return j;
}

json ToJson(const MemoryMutation& m) {
  return {{"kind", m.kind == MemoryMutation::Kind::kAdd ? "add" : "remove"},
          {"at_ms", m.at_ms},
          {"surface", m.surface},
          {"aliases", m.aliases},
          {"extended", m.extended},
          {"trigger", m.trigger}};
}

MemoryMutation MutationFromJson(const json& j) {
  MemoryMutation m;
  m.kind = j.value("kind", "add") == "remove" ? MemoryMutation::Kind::kRemove
                                              : MemoryMutation::Kind::kAdd;
  m.at_ms = j.value("at_ms", int64_t{0});
  m.surface = j.at("surface").get<std::string>();
  m.aliases = j.value("aliases", std::vector<std::string>{});
  m.extended = j.value("extended", false);
  m.trigger = j.value("trigger", std::string{});
  return m;
}

json ToJson(const AppliedMutation& a) {
  json j = ToJson(a.mutation);
  j["applied_at_ms"] = a.applied_at_ms;
  j["version_after"] = a.version_after;
  j["changed"] = a.changed;
  if (!a.error.empty()) j["error"] = a.error;
  return j;
}

json ToJson(const MemorySnapshot& snapshot) {
  json entries = json::array();
  for (const auto& e : snapshot.entries()) {
    entries.push_back({{"surface", e.surface},
                       {"normalized", e.normalized},
                       {"aliases", e.aliases},
                       {"extended", e.extended},
                       {"added_at_ms", e.added_at_ms}});
  }
  return {{"version", snapshot.version()}, {"entries", entries}};
}

json ToJson(const NewWordReport& r) {
  json per_word = json::object();
  for (const auto& [w, c] : r.per_word)
    per_word[w] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  return {{"subset", EvalSubsetName(r.subset)},
          {"tp", r.total.tp},
          {"fp", r.total.fp},
          {"fn", r.total.fn},
          {"recall", r.recall},
          {"precision", r.precision},
          {"f1", r.f1},
          {"casing_accuracy", r.casing_accuracy},
          {"vacuous", r.vacuous},
          {"per_word", per_word}};
}

std::string SegmentLog(const SessionResult& result) {
  std::string out;
  for (const auto& s : result.segments) out += ToJson(s).dump() + "\n";
  return out;
}

std::string DecodeLog(const SessionResult& result) {
  std::string out;
  for (const auto& r : result.decode_log) out += ToJson(r).dump() + "\n";
  return out;
}

std::string MutationLog(const SessionResult& result) {
  std::string out;
  for (const auto& a : result.mutation_log) out += ToJson(a).dump() + "\n";
  return out;
}

}  // namespace membooth

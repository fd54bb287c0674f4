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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "membooth/corpus.h"
#include "membooth/eval.h"
#include "membooth/stream_worker.h"

namespace membooth {

/// How the memory is filled during a run.
struct Approach {
  enum class Kind {
    kEmpty,
    kOracle,
    kOracleAfterOcc,
    kOracleBeforeOcc,
    kOracleExtAfterOcc,
    kOracleExtBeforeOcc,
    kSourcePaper,
    kSourceSlides,
    kSourceCurrSlides,
    kRandomMemory,
  };
  Kind kind = Kind::kEmpty;
  std::size_t random_k = 0;

  /// Names as printed by ToString; random memory is "random_memory(K)" or
  /// "random_memory:K".
  static Approach Parse(std::string_view text);
  std::string ToString() const;

  bool uses_operator() const;
  bool extended_policy() const;
  bool is_source() const;
};

/// Simulated operator with oracle knowledge of the reference.
struct OperatorAgent {
  enum class Policy { kAddNewWordOnMiss, kAlsoAddExtendedOnFalsePositive };
  int64_t reaction_latency_ms = 2000;
  Policy policy = Policy::kAddNewWordOnMiss;
};

struct ScenarioConfig {
  Approach approach;
  std::vector<uint64_t> seeds;
  double theta = kDefaultTheta;
  ChunkPolicy policy;
  EmissionMode mode;
  int64_t before_margin_ms = 500;
  bool use_aliases = true;
  int64_t reaction_latency_ms = 2000;
  std::string corpus_root;
  /// Restricts the run to these scripts; empty means all.
  std::vector<std::string> scripts;
  /// Restricts the evaluated new words (for focused studies); empty means
  /// every transcript new word.
  std::set<std::string> eval_words;

  static ScenarioConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  SessionConfig Session(uint64_t seed) const;
  OperatorAgent Agent() const;
};

/// Normalized new words of a script's reference (the oracle list).
std::set<std::string> TranscriptNewWords(const CorpusScript& script,
                                         const TrainingVocabulary& vocab);

/// Normalized new words the approach's source yields, if it has one.
std::optional<std::set<std::string>> SourceNewWords(
    const Approach& approach, const CorpusScript& script,
    const TrainingVocabulary& vocab);

/// Memory mutations known before the session starts. Throws
/// Error(kMissingCorpusInput) when the approach needs an absent artifact.
std::vector<MemoryMutation> BuildInitialMemory(const ScenarioConfig& config,
                                               const CorpusScript& script,
                                               const Corpus& corpus,
                                               uint64_t seed);

struct OperatorEvent {
  int64_t observed_at_ms = 0;
  uint64_t segment_id = 0;
  std::string trigger;
  MemoryMutation mutation;
};

/// Watches emitted segments and schedules corrections: misses of reference
/// new words get added after the reaction latency; with the extended policy
/// a memory hit over different reference words adds those words as
/// extended entries.
class OperatorLoop : public SessionListener {
 public:
  OperatorLoop(OperatorAgent agent, const Script& script,
               std::set<std::string> new_words,
               const std::unordered_map<std::string, std::vector<std::string>>*
                   aliases = nullptr);

  /// Mutations the agent wants after seeing `segment` at `now_ms`, given
  /// the current memory contents.
  std::vector<MemoryMutation> Observe(const EmittedSegment& segment,
                                      int64_t now_ms,
                                      const MemoryStore& store);

  void OnSegment(const EmittedSegment& segment, StreamSession& session) override;

  const std::vector<OperatorEvent>& events() const { return events_; }

 private:
  OperatorAgent agent_;
  const Script& script_;
  std::set<std::string> new_words_;
  const std::unordered_map<std::string, std::vector<std::string>>* aliases_;
  std::set<std::string> scheduled_;           // new words already requested
  std::set<std::string> scheduled_extended_;  // common words already requested
  std::map<std::string, std::string> surface_;  // normalized -> reference casing
  std::vector<OperatorEvent> events_;
};

/// Convenience: run the agent over an already finished session's segments.
std::vector<OperatorEvent> RunOperatorLoop(const SessionResult& session,
                                           const OperatorAgent& agent,
                                           const Script& script,
                                           const std::set<std::string>& new_words);

struct ScriptRun {
  std::string script;
  SessionResult session;
  std::vector<OperatorEvent> operator_events;
  std::size_t edit_distance = 0;
  std::size_t ref_words = 0;
  NewWordReport all;
  std::optional<NewWordReport> intersected;
  std::string cased_transcript;
};

struct RunResult {
  std::string approach;
  uint64_t seed = 0;
  std::vector<ScriptRun> scripts;
  NewWordReport all;
  std::optional<NewWordReport> intersected;
  double wer = 0.0;

  /// Flat metric map as aggregated across seeds.
  std::map<std::string, double> Metrics() const;
  nlohmann::json ToJson() const;
};

/// Streams, cases and scores one script.
ScriptRun RunScript(const ScenarioConfig& config, const CorpusScript& script,
                    const Corpus& corpus, uint64_t seed);

/// Cases, punctuates and scores a finished session of `script`.
ScriptRun EvaluateSession(const ScenarioConfig& config, const CorpusScript& script,
                          const Corpus& corpus, SessionResult session);

/// Runs every selected corpus script for one seed and pools the counts.
RunResult RunScenario(const ScenarioConfig& config, const Corpus& corpus,
                      uint64_t seed);

struct MatrixRow {
  std::string approach;
  std::string metric;
  MetricSummary summary;
};

struct CurvePoint {
  std::size_t k = 0;
  MetricSummary wer;
};

struct MatrixResult {
  std::vector<MatrixRow> rows;
  std::vector<CurvePoint> memory_curve;
  std::vector<RunResult> runs;
  std::vector<std::string> failures;  // "approach seed: message"

  std::string AggregateCsv() const;
  std::string CurveCsv() const;
};

/// Every config x seed; a failing cell is recorded and the rest continue.
MatrixResult RunMatrix(const std::vector<ScenarioConfig>& configs,
                       const Corpus& corpus, bool keep_runs = false);

}  // namespace membooth

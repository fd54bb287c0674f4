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

#include "membooth/cli.h"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "membooth/corpus.h"
#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/memory_store.h"
#include "membooth/scenario.h"
#include "membooth/service.h"
#include "membooth/session_log.h"
#include "membooth/synth.h"
#include "membooth/text.h"
#include "membooth/vocab_extract.h"

namespace fs = std::filesystem;

namespace membooth {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void HandleStopSignal(int) { g_stop = true; }

std::string DefaultCorpus() {
  const char* env = std::getenv("MEMBOOTH_CORPUS");
  return env && *env ? env : "corpus";
}

// Flags shared by run and matrix.
struct ScenarioFlags {
  std::string corpus = DefaultCorpus();
  std::string config_file;
  std::string seeds = "1";
  std::optional<double> theta;
  std::optional<int64_t> min_chunk_ms;
  std::string jitter;
  std::string mode;
  std::optional<std::size_t> n_best;
  std::optional<std::size_t> max_divergence;
  std::optional<int64_t> latency_ms;
  std::optional<int64_t> before_margin_ms;
  bool no_aliases = false;
  std::vector<std::string> scripts;
  std::string out;

  void Register(CLI::App* app) {
    app->add_option("--corpus", corpus, "Corpus root (default $MEMBOOTH_CORPUS or ./corpus)");
    app->add_option("--config", config_file, "Scenario JSON file; flags override it");
    app->add_option("--seeds", seeds, "Seed count N (0..N-1) or list like 1,4,7-9");
    app->add_option("--theta", theta, "Similarity threshold in (0,1]");
    app->add_option("--min-chunk-ms", min_chunk_ms, "Minimum new audio per decode");
    app->add_option("--jitter", jitter, "none | uniform:MIN:MAX[:PACKET]");
    app->add_option("--mode", mode, "ship | delay:<ms>");
    app->add_option("--n-best", n_best, "Beams per chunk");
    app->add_option("--max-divergence", max_divergence, "Max unstable tail words");
    app->add_option("--latency-ms", latency_ms, "Operator reaction latency");
    app->add_option("--before-margin-ms", before_margin_ms, "Lead time of before_occ adds");
    app->add_flag("--no-aliases", no_aliases, "Ignore corpus aliases");
    app->add_option("--scripts", scripts, "Restrict to these script names")->delimiter(',');
    app->add_option("--out", out, "Output directory");
  }

  ScenarioConfig Build(const std::string& approach) const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_file.empty()) {
      try {
        j = nlohmann::json::parse(ReadFile(config_file));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfig, config_file + ": " + e.what());
      }
    }
    if (!approach.empty()) j["approach"] = approach;
    if (theta) j["theta"] = *theta;
    if (min_chunk_ms) j["min_chunk_ms"] = *min_chunk_ms;
    if (!jitter.empty()) j["jitter"] = jitter;
    if (!mode.empty()) j["mode"] = mode;
    if (n_best) j["n_best"] = *n_best;
    if (max_divergence) j["max_divergence"] = *max_divergence;
    if (latency_ms) j["reaction_latency_ms"] = *latency_ms;
    if (before_margin_ms) j["before_margin_ms"] = *before_margin_ms;
    if (no_aliases) j["aliases"] = false;
    if (!scripts.empty()) j["scripts"] = scripts;
    if (!j.contains("seeds") || seeds != "1") j["seeds"] = ParseSeeds(seeds);
    j["corpus"] = corpus;
    return ScenarioConfig::FromJson(j);
  }
};

int ExitFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfig:
    case ErrorCode::kMissingCorpusInput:
    case ErrorCode::kParse:
    case ErrorCode::kInvalidThreshold:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

void WriteRunArtifacts(const RunResult& run, const fs::path& dir) {
  WriteFile((dir / "result.json").string(), run.ToJson().dump(2) + "\n");
  for (const auto& s : run.scripts) {
    const std::string stem = (dir / s.script).string();
    WriteFile(stem + ".segments.jsonl", SegmentLog(s.session));
    WriteFile(stem + ".decodes.jsonl", DecodeLog(s.session));
    WriteFile(stem + ".mutations.jsonl", MutationLog(s.session));
    WriteFile(stem + ".transcript.txt", s.cased_transcript + "\n");
    std::string ops;
    for (const auto& e : s.operator_events)
      ops += nlohmann::json({{"observed_at_ms", e.observed_at_ms},
                             {"segment_id", e.segment_id},
                             {"trigger", e.trigger},
                             {"mutation", ToJson(e.mutation)}})
                 .dump() +
             "\n";
    WriteFile(stem + ".operator.jsonl", ops);
  }
}

int CmdExtract(const std::vector<std::string>& docs, const std::string& slides,
               std::optional<int64_t> at_ms, const std::string& vocab_path,
               const std::string& out_path, std::ostream& out) {
  if (docs.empty() && slides.empty())
    throw Error(ErrorCode::kConfig, "extract needs --doc or --slides");
  const TrainingVocabulary vocab = ReadVocabulary(vocab_path);
  std::string text;
  for (const auto& d : docs) {
    if (!FileExists(d)) throw Error(ErrorCode::kMissingCorpusInput, "document " + d);
    text += ReadFile(d) + "\n";
  }
  if (!slides.empty()) {
    if (!FileExists(slides)) throw Error(ErrorCode::kMissingCorpusInput, "slides " + slides);
    const SlideSchedule deck = ReadSlideSchedule(slides);
    text += at_ms ? WindowSlides(deck, *at_ms) : deck.AllText();
  }
  std::string list;
  for (const auto& w : ExtractNewWords(text, vocab)) list += w + "\n";
  if (out_path.empty()) {
    out << list;
  } else {
    WriteFile(out_path, list);
  }
  return kExitOk;
}

Corpus LoadRunCorpus(const ScenarioFlags& flags, const std::string& script_path,
                     const std::string& segments_path, const std::string& vocab_path,
                     const std::string& doc, const std::string& slides,
                     const std::string& aliases_path) {
  Corpus corpus;
  if (!script_path.empty()) {
    // A single script given by files; the corpus root is optional.
    std::string segments = segments_path;
    if (segments.empty())
      segments = fs::path(script_path).replace_extension(".segments").string();
    corpus.scripts.push_back(LoadCorpusScript(script_path, segments));
    std::string vocab = vocab_path;
    if (vocab.empty()) vocab = (fs::path(flags.corpus) / "train.vocab").string();
    if (!FileExists(vocab))
      throw Error(ErrorCode::kMissingCorpusInput, "training vocabulary " + vocab);
    corpus.vocab = ReadVocabulary(vocab);
    corpus.root = flags.corpus;
  } else {
    corpus = LoadCorpus(flags.corpus);
    if (!vocab_path.empty()) corpus.vocab = ReadVocabulary(vocab_path);
    if (!doc.empty() || !slides.empty()) {
      if (flags.scripts.size() != 1)
        throw Error(ErrorCode::kConfig, "--doc/--slides need exactly one --scripts name");
    }
  }
  CorpusScript* target = nullptr;
  if (!script_path.empty()) {
    target = &corpus.scripts.front();
  } else if (flags.scripts.size() == 1) {
    for (auto& s : corpus.scripts)
      if (s.name == flags.scripts.front()) target = &s;
    if (!target)
      throw Error(ErrorCode::kConfig, "unknown script '" + flags.scripts.front() + "'");
  }
  if (!doc.empty()) {
    if (!FileExists(doc)) throw Error(ErrorCode::kMissingCorpusInput, "document " + doc);
    target->paper_text = ReadFile(doc);
  }
  if (!slides.empty()) {
    if (!FileExists(slides)) throw Error(ErrorCode::kMissingCorpusInput, "slides " + slides);
    target->slides = ReadSlideSchedule(slides);
  }
  if (!aliases_path.empty()) {
    corpus.aliases.clear();
    for (auto& e : ReadMemoryList(aliases_path)) corpus.aliases[e.normalized] = e.aliases;
  } else if (!script_path.empty()) {
    const fs::path a = fs::path(flags.corpus) / "aliases.memory";
    if (FileExists(a.string()))
      for (auto& e : ReadMemoryList(a.string())) corpus.aliases[e.normalized] = e.aliases;
  }
  return corpus;
}

}  // namespace

std::vector<uint64_t> ParseSeeds(std::string_view spec) {
  std::vector<uint64_t> out;
  const bool list = spec.find_first_of(",-") != std::string_view::npos;
  if (!list) {
    const int64_t n = ParseInt(spec, "seed count");
    if (n <= 0) throw Error(ErrorCode::kConfig, "seed count must be positive");
    for (int64_t i = 0; i < n; ++i) out.push_back(static_cast<uint64_t>(i));
    return out;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', start), spec.size());
    const std::string_view item = spec.substr(start, comma - start);
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(static_cast<uint64_t>(ParseInt(item, "seed")));
    } else {
      const int64_t a = ParseInt(item.substr(0, dash), "seed");
      const int64_t b = ParseInt(item.substr(dash + 1), "seed");
      if (a < 0 || b < a) throw Error(ErrorCode::kConfig, "bad seed range");
      for (int64_t s = a; s <= b; ++s) out.push_back(static_cast<uint64_t>(s));
    }
    start = comma + 1;
  }
  return out;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"membooth: memory-biased streaming transcription experiments"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "Document(s) -> new-words list");
  std::vector<std::string> ex_docs;
  std::string ex_slides, ex_vocab, ex_out;
  std::optional<int64_t> ex_at;
  extract->add_option("--doc", ex_docs, "Plain text document (repeatable)");
  extract->add_option("--slides", ex_slides, "Slide schedule file");
  extract->add_option("--at-ms", ex_at, "Use the slide window at this time");
  extract->add_option("--vocab", ex_vocab, "Training vocabulary")->required();
  extract->add_option("--out", ex_out, "Output list file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run one approach over the corpus");
  ScenarioFlags run_flags;
  run_flags.Register(run);
  std::string run_approach, run_script, run_segments, run_vocab, run_doc, run_slides,
      run_aliases;
  run->add_option("--approach", run_approach, "Approach name");
  run->add_option("--script", run_script, "Single script file instead of the corpus");
  run->add_option("--segments", run_segments, "Reference segments for --script");
  run->add_option("--vocab", run_vocab, "Training vocabulary override");
  run->add_option("--doc", run_doc, "Paper text for source_paper");
  run->add_option("--slides", run_slides, "Slide schedule for slide approaches");
  run->add_option("--aliases", run_aliases, "Alias memory list");

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Approach grid -> aggregate CSV");
  ScenarioFlags matrix_flags;
  matrix_flags.Register(matrix);
  std::vector<std::string> approaches;
  matrix->add_option("--approaches", approaches, "Comma list of approaches")
      ->delimiter(',')
      ->required();
  bool keep_runs = false;
  matrix->add_flag("--keep-runs", keep_runs, "Also write per-run logs");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve live sessions over TCP");
  std::string bind = "127.0.0.1:7070";
  std::string serve_corpus = DefaultCorpus();
  serve->add_option("--bind", bind, "HOST:PORT");
  serve->add_option("--corpus", serve_corpus, "Corpus root");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus");
  SynthOptions synth_options;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_options.seed, "Generator seed");
  synth->add_option("--lectures", synth_options.lectures, "Scripts besides rehm_long");
  synth->add_option("--words", synth_options.words_per_script, "Words per script");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitConfig;
  }

  try {
    if (extract->parsed())
      return CmdExtract(ex_docs, ex_slides, ex_at, ex_vocab, ex_out, out);

    if (run->parsed()) {
      if (run_approach.empty() && run_flags.config_file.empty())
        throw Error(ErrorCode::kConfig, "run needs --approach or --config");
      const Corpus corpus = LoadRunCorpus(run_flags, run_script, run_segments, run_vocab,
                                          run_doc, run_slides, run_aliases);
      ScenarioConfig config = run_flags.Build(run_approach);
      if (!run_script.empty()) config.scripts.clear();
      for (uint64_t seed : config.seeds) {
        const RunResult result = RunScenario(config, corpus, seed);
        out << nlohmann::json({{"approach", result.approach},
                               {"seed", seed},
                               {"metrics", result.Metrics()}})
                   .dump()
            << "\n";
        if (!run_flags.out.empty())
          WriteRunArtifacts(result, fs::path(run_flags.out) / result.approach /
                                        ("seed" + std::to_string(seed)));
      }
      return kExitOk;
    }

    if (matrix->parsed()) {
      const Corpus corpus = LoadCorpus(matrix_flags.corpus);
      std::vector<ScenarioConfig> configs;
      for (const auto& a : approaches) configs.push_back(matrix_flags.Build(a));
      const MatrixResult result = RunMatrix(configs, corpus, keep_runs);
      out << result.AggregateCsv();
      if (!matrix_flags.out.empty()) {
        const fs::path dir(matrix_flags.out);
        WriteFile((dir / "aggregate.csv").string(), result.AggregateCsv());
        if (!result.memory_curve.empty())
          WriteFile((dir / "memory_curve.csv").string(), result.CurveCsv());
        std::string runs;
        for (const auto& r : result.runs) {
          nlohmann::json j = r.ToJson();
          j.erase("scripts");
          runs += j.dump() + "\n";
        }
        WriteFile((dir / "runs.jsonl").string(), runs);
        std::string failures;
        for (const auto& f : result.failures) failures += f + "\n";
        WriteFile((dir / "failures.txt").string(), failures);
        if (keep_runs)
          for (const auto& r : result.runs)
            WriteRunArtifacts(r, dir / r.approach / ("seed" + std::to_string(r.seed)));
      }
      for (const auto& f : result.failures) err << "failed: " << f << "\n";
      return result.failures.empty() ? kExitOk : kExitRuntime;
    }

    if (serve->parsed()) {
      const Corpus corpus = LoadCorpus(serve_corpus);
      Server server(corpus, ParseBindAddress(bind));
      const uint16_t port = server.Start();
      err << "listening on " << ParseBindAddress(bind).host << ":" << port << "\n";
      g_stop = false;
      std::signal(SIGINT, HandleStopSignal);
      std::signal(SIGTERM, HandleStopSignal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.Stop();
      return kExitOk;
    }

    if (synth->parsed()) {
      const SynthCorpus corpus = GenerateCorpus(synth_options);
      VerifyCorpus(corpus, synth_options.theta);
      WriteCorpus(corpus, synth_out);
      std::size_t words = 0, new_words = 0;
      for (const auto& s : corpus.scripts) {
        words += s.corpus.script.tokens.size();
        new_words += s.new_words.size();
      }
      err << "wrote " << corpus.scripts.size() << " scripts, " << words << " words, "
          << new_words << " new words, " << corpus.vocab.size()
          << " vocabulary entries to " << synth_out << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitFor(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace membooth

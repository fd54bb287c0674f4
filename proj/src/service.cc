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

#include "membooth/service.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <set>

#include "membooth/error.h"
#include "membooth/io.h"
#include "membooth/scenario.h"

namespace membooth {

namespace {

void WriteAll(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, std::string("send: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

const std::set<std::string> kSessionOptions = {
    "script", "seed",   "approach",       "theta",  "min_chunk_ms",
    "jitter", "n_best", "max_divergence", "stall_chunks", "mode",
    "speed",  "aliases", "before_margin_ms"};

// One client connection. The reader runs on the connection thread, the
// session on its own thread; frames from both go through Send.
class Connection : public SessionListener {
 public:
  Connection(int fd, const Corpus& corpus) : fd_(fd), corpus_(corpus) {}

  void Run() {
    FrameReader reader;
    char buf[8192];
    try {
      for (;;) {
        const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        reader.Feed(std::string_view(buf, static_cast<std::size_t>(n)));
        while (auto message = reader.Next()) Handle(*message);
      }
    } catch (const Error& e) {
      // Malformed input ends the connection.
      SendQuietly(MessageKind::kError, ErrorPayload(ErrorCodeName(e.code()), e.what()));
      ::shutdown(fd_, SHUT_RDWR);
    }
    {
      std::lock_guard lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    if (session_thread_.joinable()) session_thread_.join();
  }

  void OnSegment(const EmittedSegment& segment, StreamSession& session) override {
    ++segments_;
    words_ += segment.tokens.size();
    for (const auto& t : segment.tokens) hits_ += t.provenance.is_memory_hit();
    Send(MessageKind::kTranscriptStable, StablePayload(segment, session.now()));
    Send(MessageKind::kMetricsUpdate,
         {{"at_ms", session.now()},
          {"segments", segments_},
          {"stable_words", words_},
          {"memory_hits", hits_},
          {"retractions", retractions_},
          {"memory_version", session.store().version()}});
  }

  void OnRetract(const EmittedSegment& segment, StreamSession& session) override {
    ++retractions_;
    Send(MessageKind::kTranscriptRetract, RetractPayload(segment, session.now()));
  }

  void OnPartial(std::span<const BeamToken> tail, StreamSession& session) override {
    Send(MessageKind::kTranscriptPartial, PartialPayload(tail, session.now()));
  }

  void OnMutation(const AppliedMutation& applied, StreamSession& session) override {
    nlohmann::json payload = MemoryStatePayload(*session.store().Snapshot(),
                                                applied.applied_at_ms,
                                                applied.mutation.trigger);
    payload["changed"] = applied.changed;
    if (!applied.error.empty()) payload["error"] = applied.error;
    Send(MessageKind::kMemoryState, std::move(payload));
  }

 private:
  void Send(MessageKind kind, nlohmann::json payload) {
    std::lock_guard lk(write_mu_);
    if (broken_) return;
    ProtocolMessage m{++seq_, kind, std::move(payload)};
    try {
      WriteAll(fd_, EncodeFrame(m));
    } catch (const Error&) {
      broken_ = true;
    }
  }
  void SendQuietly(MessageKind kind, nlohmann::json payload) {
    Send(kind, std::move(payload));
  }
  void SendError(const Error& e) {
    Send(MessageKind::kError, ErrorPayload(ErrorCodeName(e.code()), e.what()));
  }

  void Handle(const ProtocolMessage& message) {
    switch (message.kind) {
      case MessageKind::kSessionStart:
        try {
          StartSession(message.payload);
        } catch (const Error& e) {
          SendError(e);
        }
        return;
      case MessageKind::kMemoryAdd:
      case MessageKind::kMemoryRemove: {
        if (!started_) {
          SendError(Error(ErrorCode::kProtocol, "no session started"));
          return;
        }
        try {
          MemoryMutation m = MutationFromPayload(message.kind, message.payload);
          m.trigger = "client:" + std::to_string(message.seq);
          {
            std::lock_guard lk(mu_);
            queue_.push_back(std::move(m));
          }
          cv_.notify_all();
        } catch (const Error& e) {
          SendError(e);
        }
        return;
      }
      default:
        SendError(Error(ErrorCode::kProtocol,
                        "clients may not send " +
                            std::string(MessageKindName(message.kind))));
    }
  }

  void StartSession(const nlohmann::json& options) {
    if (started_) throw Error(ErrorCode::kProtocol, "session already started");
    nlohmann::json scenario = nlohmann::json::object();
    for (const auto& [key, value] : options.items()) {
      if (!kSessionOptions.count(key))
        throw Error(ErrorCode::kConfig, "unknown session option '" + key + "'");
      if (key == "seed" || key == "speed" || key == "script") continue;
      scenario[key] = value;
    }
    if (!options.contains("script") || !options["script"].is_string())
      throw Error(ErrorCode::kConfig, "session_start needs a script name");
    const std::string name = options["script"].get<std::string>();
    const CorpusScript* script = corpus_.Find(name);
    if (!script) throw Error(ErrorCode::kConfig, "unknown script '" + name + "'");
    uint64_t seed = 0;
    double speed = 1.0;
    try {
      seed = options.value("seed", uint64_t{0});
      speed = options.value("speed", 1.0);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
    scenario["seeds"] = nlohmann::json::array({seed});
    ScenarioConfig config = ScenarioConfig::FromJson(scenario);
    auto initial = BuildInitialMemory(config, *script, corpus_, seed);
    started_ = true;
    Send(MessageKind::kSessionStart,
         {{"script", name},
          {"seed", seed},
          {"speed", speed},
          {"duration_ms", script->script.duration_ms()},
          {"config", config.ToJson()}});
    session_thread_ = std::thread([this, config, script, seed, speed,
                                   initial = std::move(initial)]() mutable {
      try {
        RunSession(config, *script, seed, speed, std::move(initial));
      } catch (const Error& e) {
        SendError(e);
      } catch (const std::exception& e) {
        SendError(Error(ErrorCode::kIo, e.what()));
      }
      ::shutdown(fd_, SHUT_RDWR);
    });
  }

  void RunSession(const ScenarioConfig& config, const CorpusScript& script,
                  uint64_t seed, double speed, std::vector<MemoryMutation> initial) {
    MemoryStore store;
    StreamSession session(script.script, config.Session(seed), store);
    session.AddListener(this);
    Send(MessageKind::kMemoryState, MemoryStatePayload(*store.Snapshot(), 0, "initial"));
    for (auto& m : initial) session.Schedule(std::move(m));

    const bool pacing = speed > 0;
    const auto t0 = std::chrono::steady_clock::now();
    auto sim_now = [&] {
      const std::chrono::duration<double, std::milli> elapsed =
          std::chrono::steady_clock::now() - t0;
      return static_cast<int64_t>(elapsed.count() * speed);
    };
    while (!session.finished()) {
      const auto next = session.NextEventTime();
      std::vector<MemoryMutation> incoming;
      {
        std::unique_lock lk(mu_);
        if (pacing && next) {
          const auto deadline =
              t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double, std::milli>(
                           static_cast<double>(*next) / speed));
          cv_.wait_until(lk, deadline, [&] { return stop_ || !queue_.empty(); });
        }
        if (stop_) return;
        incoming.swap(queue_);
      }
      if (!incoming.empty()) {
        // Never in the simulated past, never before what already ran.
        const int64_t at = std::max(pacing ? sim_now() : int64_t{0}, session.now() + 1);
        for (auto& m : incoming) {
          m.at_ms = at;
          session.Schedule(std::move(m));
        }
        continue;
      }
      if (pacing && next && sim_now() < *next) continue;
      if (!session.Step()) break;
    }

    const int64_t end_ms = session.now();
    ScriptRun run = EvaluateSession(config, script, corpus_, session.TakeResult());
    const double wer = run.ref_words ? static_cast<double>(run.edit_distance) /
                                           static_cast<double>(run.ref_words)
                                     : 0.0;
    Send(MessageKind::kSessionEnd,
         {{"at_ms", end_ms},
          {"transcript", run.session.TranscriptText()},
          {"cased_transcript", run.cased_transcript},
          {"metrics",
           {{"wer", wer},
            {"recall", run.all.recall},
            {"precision", run.all.precision},
            {"f1", run.all.f1},
            {"casing_accuracy", run.all.casing_accuracy}}}});
  }

  int fd_;
  const Corpus& corpus_;
  std::mutex write_mu_;
  uint64_t seq_ = 0;
  bool broken_ = false;

  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<MemoryMutation> queue_;
  bool stop_ = false;
  bool started_ = false;
  std::thread session_thread_;

  std::size_t segments_ = 0, words_ = 0, hits_ = 0, retractions_ = 0;
};

}  // namespace

ServeOptions ParseBindAddress(std::string_view spec) {
  ServeOptions o;
  const auto colon = spec.rfind(':');
  std::string_view port = spec;
  if (colon != std::string_view::npos) {
    if (colon > 0) o.host = std::string(spec.substr(0, colon));
    port = spec.substr(colon + 1);
  }
  int64_t p = 0;
  try {
    p = ParseInt(port, "port");
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (p < 0 || p > 65535) throw Error(ErrorCode::kConfig, "port out of range");
  o.port = static_cast<uint16_t>(p);
  return o;
}

Server::Server(const Corpus& corpus, ServeOptions options)
    : corpus_(corpus), options_(std::move(options)) {}

Server::~Server() { Stop(); }

uint16_t Server::Start() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(options_.port);
  if (int rc = ::getaddrinfo(options_.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw Error(ErrorCode::kIo, std::string("resolve: ") + gai_strerror(rc));
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(res);
    throw Error(ErrorCode::kIo, std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::freeaddrinfo(res);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::kIo, "bind " + options_.host + ":" + port + ": " + why);
  }
  ::freeaddrinfo(res);
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  accept_thread_ = std::thread([this] { AcceptLoop(); });
  return ntohs(bound.sin_port);
}

void Server::AcceptLoop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lk(mu_);
    connection_fds_.push_back(fd);
    connections_.emplace_back([this, fd] {
      Connection(fd, corpus_).Run();
      std::lock_guard inner(mu_);
      std::erase(connection_fds_, fd);
      ::close(fd);
    });
  }
}

void Server::Stop() {
  if (stopping_.exchange(true)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    return;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lk(mu_);
    for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(connections_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void Server::Wait() {
  while (!stopping_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

ProtocolClient::~ProtocolClient() { Close(); }

void ProtocolClient::Connect(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
      rc != 0)
    throw Error(ErrorCode::kIo, std::string("resolve: ") + gai_strerror(rc));
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    Close();
    throw Error(ErrorCode::kIo, std::string("connect: ") + std::strerror(errno));
  }
  closed_ = false;
}

uint64_t ProtocolClient::Send(MessageKind kind, nlohmann::json payload) {
  ProtocolMessage m{++seq_, kind, std::move(payload)};
  SendRaw(EncodeFrame(m));
  return m.seq;
}

void ProtocolClient::SendRaw(std::string_view bytes) {
  if (fd_ < 0) throw Error(ErrorCode::kIo, "not connected");
  WriteAll(fd_, bytes);
}

std::optional<ProtocolMessage> ProtocolClient::Receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto m = reader_.Next()) return m;
    if (closed_ || fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
    char buf[8192];
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      closed_ = true;
      continue;
    }
    reader_.Feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

void ProtocolClient::Close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  closed_ = true;
}

}  // namespace membooth

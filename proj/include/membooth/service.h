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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "membooth/corpus.h"
#include "membooth/protocol.h"

namespace membooth {

struct ServeOptions {
  std::string host = "127.0.0.1";
  uint16_t port = 7070;  // 0 picks a free port
};

/// Parses "HOST:PORT" or ":PORT" or "PORT".
ServeOptions ParseBindAddress(std::string_view spec);

/// TCP session service, one session per connection.
class Server {
 public:
  Server(const Corpus& corpus, ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and listens; returns the bound port. Throws Error(kIo).
  uint16_t Start();
  void Stop();
  /// Blocks until Stop() is called from another thread or a signal handler.
  void Wait();

 private:
  void AcceptLoop();

  const Corpus& corpus_;
  ServeOptions options_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> connections_;
  std::vector<int> connection_fds_;
};

/// Blocking client used by tests and the replay tool.
class ProtocolClient {
 public:
  ProtocolClient() = default;
  ~ProtocolClient();
  ProtocolClient(const ProtocolClient&) = delete;
  ProtocolClient& operator=(const ProtocolClient&) = delete;

  void Connect(const std::string& host, uint16_t port);
  /// Sends a frame with the next client seq and returns that seq.
  uint64_t Send(MessageKind kind, nlohmann::json payload);
  /// Sends raw bytes (for malformed-frame tests).
  void SendRaw(std::string_view bytes);
  /// Next frame, or nullopt on timeout or when the server closed.
  std::optional<ProtocolMessage> Receive(std::chrono::milliseconds timeout);
  bool closed() const { return closed_; }
  void Close();

 private:
  int fd_ = -1;
  uint64_t seq_ = 0;
  bool closed_ = false;
  FrameReader reader_;
};

}  // namespace membooth

// Copyright 2026 The coplan Authors
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

#include <memory>
#include <string>

#include "coplan/session.hpp"

namespace coplan {

struct ServerOptions {
  std::string address = "127.0.0.1";
  /// 0 binds an ephemeral port; see SessionServer::port().
  unsigned short port = 0;
  ServiceOptions service;
};

/// HTTP + WebSocket front end for SessionRegistry:
///   POST /session, GET /session/{id}, DELETE /session/{id}, GET /healthz,
///   WebSocket /session/{id}/ws.
/// All I/O, timers and session events run on one thread.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  unsigned short port() const;
  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop(), or SIGINT/SIGTERM when
  /// `stop_on_signal` is set.
  void run(bool stop_on_signal = false);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coplan

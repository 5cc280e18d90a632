// Copyright 2026 The tracebench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tracebench/runner.hpp"

namespace tracebench {

// Behaviour of the offline chat-completions stand-in. The responder parses
// the last Program block and Input call out of the user prompt, executes
// them and answers with the exact trace, optionally dressed up.
struct MockOptions {
  bool think = false;            // wrap a thought span before the answer
  bool fences = true;            // fence the trace like a model would
  bool reasoning_field = false;  // put the thought in message.reasoning_content
  double wrong_rate = 0.0;       // share of replies with one corrupted step
  std::uint64_t seed = 0;        // drives which replies go wrong
  // Statuses returned, in order, for the first requests before any real
  // answer (e.g. {429, 429} for two rate-limit refusals).
  std::vector<int> scripted_statuses;
};

// Stateless answer for one request body. Prompts without a Program block
// (transduction) get a reply with no trace.
HttpReply mock_reply(const nlohmann::json& payload, const MockOptions& options);

// In-process client that answers through mock_reply.
class MockChatClient : public ChatClient {
 public:
  explicit MockChatClient(MockOptions options = {});
  HttpReply post(const nlohmann::json& payload) override;
  std::size_t requests() const { return requests_.load(); }

 private:
  MockOptions options_;
  std::mutex mu_;
  std::size_t scripted_used_ = 0;
  std::atomic<std::size_t> requests_{0};
};

// Loopback HTTP server exposing the mock on POST /v1/chat/completions.
class MockServer {
 public:
  explicit MockServer(MockOptions options = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds 127.0.0.1 (port 0 picks an ephemeral one) and serves on a
  // background thread. Returns the bound port.
  int start(int port = 0);
  // Blocks serving on the calling thread.
  void serve_forever(const std::string& host, int port);
  void stop();
  int port() const { return port_; }
  std::string base_url() const;
  std::size_t requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace tracebench

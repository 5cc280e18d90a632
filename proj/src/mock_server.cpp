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

#include "tracebench/mock_server.hpp"

#include <httplib.h>

#include <sstream>

#include "tracebench/rng.hpp"
#include "tracebench/trace.hpp"

namespace tracebench {

using nlohmann::json;

namespace {

// Body of the last "\n{label}:\n```\n...\n```" block in `prompt`.
std::optional<std::string> last_block(const std::string& prompt, const std::string& label) {
  const std::string open = "\n" + label + ":\n```\n";
  const auto start = prompt.rfind(open);
  if (start == std::string::npos) return std::nullopt;
  const auto body = start + open.size();
  const auto end = prompt.find("\n```", body);
  if (end == std::string::npos) return std::nullopt;
  return prompt.substr(body, end - body);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

json error_body(const std::string& message) {
  return {{"error", {{"message", message}, {"type", "invalid_request_error"}}}};
}

json completion(const std::string& model, const std::string& content,
                const std::optional<std::string>& reasoning) {
  json message{{"role", "assistant"}, {"content", content}};
  if (reasoning) message["reasoning_content"] = *reasoning;
  return {{"id", "mock-" + hex64(fnv1a64(content))},
          {"object", "chat.completion"},
          {"model", model},
          {"choices", json::array({{{"index", 0},
                                    {"message", message},
                                    {"finish_reason", "stop"}}})},
          {"usage", {{"completion_tokens", estimate_tokens(content)}}}};
}

}  // namespace

HttpReply mock_reply(const json& payload, const MockOptions& options) {
  HttpReply reply;
  if (!payload.is_object() || !payload.contains("messages") || !payload["messages"].is_array() ||
      payload["messages"].empty()) {
    reply.status = 400;
    reply.body = error_body("messages is required").dump();
    return reply;
  }
  std::string prompt;
  bool continuing = false;
  for (const auto& m : payload["messages"]) {
    const auto role = m.value("role", std::string());
    if (role == "user") prompt = m.value("content", std::string());
    continuing = role == "assistant";
  }
  const auto model = payload.value("model", std::string("mock"));

  const auto program_text = last_block(prompt, "Program");
  const auto call_text = last_block(prompt, "Input");
  if (!program_text || !call_text) {
    reply.status = 200;
    reply.body = completion(model, "I cannot determine the trace without the program.",
                            std::nullopt)
                     .dump();
    return reply;
  }

  std::vector<std::string> steps;
  try {
    const auto program = parse_program(split_lines(*program_text));
    const auto args = parse_call(*call_text, program.params());
    const auto result = execute(program, args);
    if (const auto* err = std::get_if<ExecError>(&result)) {
      reply.status = 200;
      reply.body = completion(model, "Execution fails at line " + std::to_string(err->line) + ".",
                              std::nullopt)
                       .dump();
      return reply;
    }
    steps = trace_lines(std::get<Trace>(result));
  } catch (const std::exception& e) {
    reply.status = 400;
    reply.body = error_body(std::string("cannot read prompt: ") + e.what()).dump();
    return reply;
  }

  const auto h = fnv1a64(hex64(options.seed) + prompt);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < options.wrong_rate && !steps.empty()) {
    auto& victim = steps[h % steps.size()];
    if (auto step = parse_step(victim)) {
      step->line += 1;
      victim = render_step(*step);
    }
  }

  std::string answer;
  for (std::size_t i = 0; i < steps.size(); ++i) answer += (i ? "\n" : "") + steps[i];
  if (options.fences) answer = "```\n" + answer + "\n```";

  std::optional<std::string> reasoning;
  std::string content;
  if (options.think && !continuing) {
    const std::string thought = "Let me trace the program line by line. The call binds " +
                                std::to_string(split_lines(*call_text).size()) +
                                " argument list, so execution starts at L2.";
    if (options.reasoning_field) {
      reasoning = thought;
    } else {
      content = "<think>\n" + thought + "\n</think>\n\n";
    }
  }
  if (!continuing) content += "The execution trace is:\n";
  content += answer;

  reply.status = 200;
  reply.body = completion(model, content, reasoning).dump();
  return reply;
}

MockChatClient::MockChatClient(MockOptions options) : options_(std::move(options)) {}

HttpReply MockChatClient::post(const json& payload) {
  ++requests_;
  {
    std::lock_guard lock(mu_);
    if (scripted_used_ < options_.scripted_statuses.size()) {
      HttpReply r;
      r.status = options_.scripted_statuses[scripted_used_++];
      r.body = error_body("scripted failure").dump();
      return r;
    }
  }
  return mock_reply(payload, options_);
}

struct MockServer::Impl {
  explicit Impl(MockOptions o) : client(std::move(o)) {}
  MockChatClient client;
  httplib::Server server;
  std::thread thread;

  void install() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      json payload = json::parse(req.body, nullptr, false);
      if (payload.is_discarded()) {
        res.status = 400;
        res.set_content(error_body("body is not JSON").dump(), "application/json");
        return;
      }
      const auto reply = client.post(payload);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"status\":\"ok\"}", "application/json");
    });
  }
};

MockServer::MockServer(MockOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->install();
}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (impl_->server.bind_to_port("127.0.0.1", port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw std::runtime_error("mock server cannot bind 127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockServer::serve_forever(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("mock server cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::size_t MockServer::requests() const { return impl_->client.requests(); }

}  // namespace tracebench

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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "tracebench/runner.hpp"

namespace tracebench {

HttpChatClient::HttpChatClient(Endpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) api_key_ = key;
  }
}

HttpReply HttpChatClient::post(const nlohmann::json& payload) {
  HttpReply reply;
  try {
    httplib::Client client(endpoint_.base_url);
    if (!client.is_valid()) {
      reply.error = "invalid base_url " + endpoint_.base_url;
      return reply;
    }
    client.set_connection_timeout(std::min(endpoint_.timeout_seconds, 30), 0);
    client.set_read_timeout(endpoint_.timeout_seconds, 0);
    client.set_write_timeout(endpoint_.timeout_seconds, 0);
    if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);
    auto res = client.Post(endpoint_.path, payload.dump(), "application/json");
    if (!res) {
      reply.error = httplib::to_string(res.error());
      return reply;
    }
    reply.status = res->status;
    reply.body = std::move(res->body);
  } catch (const std::exception& e) {
    reply.status = 0;
    reply.error = e.what();
  }
  return reply;
}

}  // namespace tracebench

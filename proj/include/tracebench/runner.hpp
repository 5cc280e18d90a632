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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracebench/bench.hpp"
#include "tracebench/grader.hpp"
#include "tracebench/prompt.hpp"

namespace tracebench {

enum class ThinkMode { On, Off };

struct Endpoint {
  std::string base_url = "http://127.0.0.1:8000";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";  // unset or empty variable: no auth header
  int timeout_seconds = 600;
  nlohmann::json extra_body = nlohmann::json::object();  // merged into every payload
};

struct RetryPolicy {
  int max_attempts = 6;  // total tries per request
  int initial_backoff_ms = 500;
  double multiplier = 2.0;
  int max_backoff_ms = 30'000;
};

struct RunConfig {
  Endpoint endpoint;
  std::string model = "model";
  int voters = 31;
  double temperature = 0.0;
  ThinkMode think_mode = ThinkMode::On;
  std::string assistant_prefix{kNoThinkPrefix};
  // Sent with think_mode=off so servers continue the assistant turn instead
  // of opening a new one.
  bool continue_final_message = true;
  double max_token_multiplier = 20.0;
  int parallelism = 4;
  RetryPolicy retry;
  int shots = 4;
  ShotStrategy::Kind strategy = ShotStrategy::Kind::PoolSample;
  Variation variation = Variation::Default;
  std::uint64_t seed = 0;
  std::vector<std::string> instances;  // empty: every instance
  std::optional<std::size_t> limit;    // first N selected instances

  ShotStrategy shot_strategy() const { return {strategy, shots}; }
  // Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);  // rejects unknown keys

// Output budget for one request: multiplier x estimated gold-trace tokens.
int max_output_tokens(const Trace& gold, double multiplier);

// The chat-completions request body for one prompt.
nlohmann::json build_payload(const PromptBundle& bundle, const RunConfig& cfg, int max_tokens);

// Extracts the assistant text; a separate reasoning field is folded back in
// as a think span so thought statistics survive.
std::optional<std::string> extract_reply_text(const nlohmann::json& body);

struct HttpReply {
  int status = 0;      // 0 when the transport failed
  std::string body;
  std::string error;   // transport error description
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual HttpReply post(const nlohmann::json& payload) = 0;
};

// HTTP(S) client for a chat-completions endpoint. Thread-safe: every call
// opens its own connection.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(Endpoint endpoint);
  HttpReply post(const nlohmann::json& payload) override;

 private:
  Endpoint endpoint_;
  std::string api_key_;
};

struct RequestOutcome {
  bool ok = false;
  std::string text;
  int attempts = 0;
  int last_status = 0;
  std::string error;
};

// Posts with retries on transport errors, 408, 429 and 5xx, sleeping
// initial_backoff * multiplier^i (capped) between tries. Other statuses and
// malformed bodies fail immediately.
RequestOutcome issue_request(ChatClient& client, const nlohmann::json& payload,
                             const RetryPolicy& policy,
                             const std::function<void(std::chrono::milliseconds)>& sleep = {});

// One line of responses.jsonl.
struct ResponseRecord {
  std::string instance_id;
  int voter = 0;
  bool ok = false;
  std::string response;  // raw assistant text, verbatim
  int attempts = 0;
  int retries = 0;
  int status = 0;
  std::string error;
  std::vector<ShotRef> shots;
  int max_tokens = 0;
  std::size_t prompt_tokens = 0;
};

nlohmann::json to_json(const ResponseRecord& r);
ResponseRecord response_record_from_json(const nlohmann::json& j);

struct RunOptions {
  std::filesystem::path dataset;
  std::filesystem::path out_dir;
  // Stop after writing this many new records (used to exercise resume).
  std::optional<std::size_t> max_new_records;
  bool retry_failed = false;  // re-request pairs whose last record failed
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleeping
};

struct RunSummary {
  std::string run_id;
  std::size_t planned = 0;      // instances x voters
  std::size_t already_done = 0;
  std::size_t requested = 0;    // new records written by this call
  std::size_t failed = 0;       // among the new records
  std::size_t retries = 0;
  bool complete = false;
};

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Issues every missing (instance, voter) request and appends its record to
// out_dir/responses.jsonl, then rewrites out_dir/manifest.json. Resuming
// requires the same config and dataset hash as the existing manifest;
// otherwise RunError is thrown before any request.
RunSummary run_eval(const RunConfig& cfg, const RunOptions& options, ChatClient& client);

// Reads responses.jsonl, dropping a torn final line. Later records for the
// same (instance, voter) supersede earlier ones.
std::vector<ResponseRecord> read_responses(const std::filesystem::path& run_dir);

// Grades a finished run from its persisted records alone. Throws RunError
// naming the first missing (instance, voter) pair.
GradeReport grade_run(const std::filesystem::path& run_dir,
                      const std::optional<std::filesystem::path>& dataset_override = {});

// Writes grades.jsonl and summary.json into the run directory.
void write_grades(const GradeReport& report, const std::filesystem::path& run_dir);
GradeReport read_grades(const std::filesystem::path& run_dir);

// Per-bin overview table, per-bin and per-voter-count series and thought statistics
// as CSV and markdown under run_dir/report/. Returns the written files.
std::vector<std::filesystem::path> write_report(const GradeReport& report,
                                                const std::filesystem::path& run_dir);
std::string overview_markdown(const GradeReport& report);

}  // namespace tracebench

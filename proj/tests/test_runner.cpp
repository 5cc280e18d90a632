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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "tracebench/config.hpp"
#include "tracebench/mock_server.hpp"
#include "tracebench/runner.hpp"

using namespace tracebench;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tracebench_test_runner" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// 12 instances, three per default bin, pool of 8.
const std::filesystem::path& small_dataset() {
  static const auto path = [] {
    SplitConfig cfg;
    cfg.gen.seed = 77;
    cfg.build.pool_size = 8;
    for (auto& b : cfg.bins) b.target_count = 3;
    auto p = std::filesystem::temp_directory_path() / "tracebench_test_runner" / "small.jsonl";
    std::filesystem::create_directories(p.parent_path());
    write_split(cfg, p);
    return p;
  }();
  return path;
}

RunConfig quick_config(int voters) {
  RunConfig cfg;
  cfg.voters = voters;
  cfg.seed = 3;
  cfg.parallelism = 3;
  cfg.retry.initial_backoff_ms = 0;
  return cfg;
}

RunOptions options_for(const std::filesystem::path& out) {
  RunOptions o;
  o.dataset = small_dataset();
  o.out_dir = out;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

std::size_t count_lines(const std::filesystem::path& path) {
  return tracebench::testing::read_lines(path).size();
}

PromptBundle some_bundle() {
  Dataset ds = load_dataset(small_dataset());
  return render_prompt(ds.instances.front(), ShotStrategy::pool_sample(2), Variation::Default, 0, 1);
}

}  // namespace

TEST_CASE("think-off payload carries the assistant prefix verbatim") {
  auto cfg = quick_config(1);
  cfg.model = "m";
  cfg.think_mode = ThinkMode::Off;
  const auto bundle = some_bundle();
  const auto p = build_payload(bundle, cfg, 1234);
  REQUIRE(p["messages"].size() == 2);
  CHECK(p["messages"][0]["role"] == "user");
  CHECK(p["messages"][0]["content"] == bundle.prompt);
  CHECK(p["messages"][1]["role"] == "assistant");
  CHECK(p["messages"][1]["content"] == "The execution trace is:\n");
  CHECK(p["continue_final_message"] == true);
  CHECK(p["add_generation_prompt"] == false);
  CHECK(p["max_tokens"] == 1234);
  CHECK(p["temperature"] == 0.0);

  cfg.think_mode = ThinkMode::On;
  cfg.endpoint.extra_body = {{"top_p", 0.95}, {"temperature", 0.6}};
  const auto q = build_payload(bundle, cfg, 10);
  CHECK(q["messages"].size() == 1);
  CHECK_FALSE(q.contains("continue_final_message"));
  CHECK(q["top_p"] == 0.95);
  CHECK(q["temperature"] == 0.6);
}

TEST_CASE("output budget is the multiplier times the gold token estimate") {
  Trace t;
  for (int i = 0; i < 49; ++i) t.steps.push_back({2, std::nullopt});
  t.steps.push_back({12, std::nullopt});
  REQUIRE(estimate_tokens(trace_to_text(t)) == 200);
  CHECK(max_output_tokens(t, 20.0) == 4000);
  CHECK(max_output_tokens(t, 0.5) == 100);
  CHECK(max_output_tokens(t, 0.001) == 1);
}

TEST_CASE("reply text extraction") {
  CHECK(extract_reply_text(json::parse(R"({"choices":[{"message":{"content":"x"}}]})")) == "x");
  CHECK(extract_reply_text(json::parse(
            R"({"choices":[{"message":{"content":"L2,","reasoning_content":"hmm"}}]})")) ==
        "<think>hmm</think>L2,");
  CHECK(extract_reply_text(json::parse(R"({"choices":[{"message":{"content":null}}]})")) == "");
  CHECK_FALSE(extract_reply_text(json::parse(R"({"choices":[]})")));
  CHECK_FALSE(extract_reply_text(json::parse(R"({"error":"x"})")));
}

TEST_CASE("two 429s then success: two retries with exponential backoff") {
  MockOptions mo;
  mo.scripted_statuses = {429, 429};
  MockChatClient client(mo);
  RetryPolicy policy;
  std::vector<long long> waits;
  const auto payload = build_payload(some_bundle(), quick_config(1), 100);
  const auto out = issue_request(client, payload, policy,
                                 [&](std::chrono::milliseconds ms) { waits.push_back(ms.count()); });
  CHECK(out.ok);
  CHECK(out.attempts == 3);
  CHECK(out.last_status == 200);
  CHECK(waits == std::vector<long long>{500, 1000});
  CHECK(client.requests() == 3);
}

TEST_CASE("non-retryable status and exhausted retries fail") {
  const auto payload = build_payload(some_bundle(), quick_config(1), 100);
  auto no_sleep = [](std::chrono::milliseconds) {};
  {
    MockOptions mo;
    mo.scripted_statuses = {400};
    MockChatClient client(mo);
    const auto out = issue_request(client, payload, RetryPolicy{}, no_sleep);
    CHECK_FALSE(out.ok);
    CHECK(out.attempts == 1);
    CHECK(out.last_status == 400);
  }
  {
    MockOptions mo;
    mo.scripted_statuses = std::vector<int>(10, 503);
    MockChatClient client(mo);
    RetryPolicy policy;
    policy.max_attempts = 4;
    policy.max_backoff_ms = 700;
    std::vector<long long> waits;
    const auto out = issue_request(client, payload, policy,
                                   [&](std::chrono::milliseconds ms) { waits.push_back(ms.count()); });
    CHECK_FALSE(out.ok);
    CHECK(out.attempts == 4);
    CHECK(waits == std::vector<long long>{500, 700, 700});
  }
}

TEST_CASE("run config JSON round-trip rejects unknown keys") {
  auto cfg = quick_config(5);
  cfg.think_mode = ThinkMode::Off;
  cfg.variation = Variation::Transduction;
  cfg.strategy = ShotStrategy::Kind::FixedPermuted;
  cfg.limit = 7;
  cfg.instances = {"a", "b"};
  const auto j = run_config_to_json(cfg);
  CHECK(run_config_to_json(run_config_from_json(j)) == j);
  auto bad = j;
  bad["votes"] = 3;
  CHECK_THROWS_AS(run_config_from_json(bad), std::invalid_argument);
  bad = j;
  bad["voters"] = 0;
  CHECK_THROWS_AS(run_config_from_json(bad), std::invalid_argument);
}

TEST_CASE("10 instances x 31 voters yields 310 records") {
  const auto dir = scratch("full");
  auto cfg = quick_config(31);
  cfg.limit = 10;
  MockChatClient client;
  const auto s = run_eval(cfg, options_for(dir), client);
  CHECK(s.planned == 310);
  CHECK(s.requested == 310);
  CHECK(s.complete);
  CHECK(client.requests() == 310);
  CHECK(count_lines(dir / "responses.jsonl") == 310);
  const auto records = read_responses(dir);
  CHECK(records.size() == 310);
  std::set<std::pair<std::string, int>> pairs;
  for (const auto& r : records) pairs.insert({r.instance_id, r.voter});
  CHECK(pairs.size() == 310);
  const auto manifest = read_json_file(dir / "manifest.json");
  CHECK(manifest["status"]["ok"] == 310);
  CHECK(manifest["records"].size() == 310);
  CHECK(manifest["instance_ids"].size() == 10);
}

TEST_CASE("interrupted run resumes with exactly the missing requests") {
  const auto dir = scratch("resume");
  auto cfg = quick_config(31);
  cfg.limit = 10;
  auto opts = options_for(dir);
  {
    MockChatClient client;
    opts.max_new_records = 100;
    const auto s = run_eval(cfg, opts, client);
    CHECK(s.requested == 100);
    CHECK_FALSE(s.complete);
    CHECK(client.requests() == 100);
  }
  CHECK_THROWS_AS(grade_run(dir), RunError);
  {
    // A crash mid-write leaves a torn final line.
    std::ofstream out(dir / "responses.jsonl", std::ios::app | std::ios::binary);
    out << R"({"instance_id":"i00)";
  }
  MockChatClient client;
  opts.max_new_records.reset();
  const auto s = run_eval(cfg, opts, client);
  CHECK(s.already_done == 100);
  CHECK(s.requested == 210);
  CHECK(client.requests() == 210);
  CHECK(s.complete);
  CHECK(count_lines(dir / "responses.jsonl") == 310);

  MockChatClient idle;
  const auto again = run_eval(cfg, opts, idle);
  CHECK(again.requested == 0);
  CHECK(idle.requests() == 0);
}

TEST_CASE("resume refuses a different dataset or config") {
  const auto dir = scratch("mismatch");
  auto cfg = quick_config(2);
  cfg.limit = 2;
  auto opts = options_for(dir);
  MockChatClient client;
  run_eval(cfg, opts, client);

  const auto other = dir.parent_path() / "mismatch_other.jsonl";
  {
    SplitConfig sc;
    sc.gen.seed = 78;
    sc.build.pool_size = 8;
    for (auto& b : sc.bins) b.target_count = 1;
    write_split(sc, other);
  }
  auto changed = opts;
  changed.dataset = other;
  MockChatClient second;
  CHECK_THROWS_AS(run_eval(cfg, changed, second), RunError);
  auto cfg2 = cfg;
  cfg2.seed = 4;
  CHECK_THROWS_AS(run_eval(cfg2, opts, second), RunError);
  CHECK(second.requests() == 0);

  // Endpoint and parallelism may change between resumes.
  auto cfg3 = cfg;
  cfg3.parallelism = 1;
  cfg3.endpoint.base_url = "http://127.0.0.1:1";
  CHECK_NOTHROW(run_eval(cfg3, opts, second));
  CHECK_THROWS_AS(grade_run(dir, other), RunError);
}

TEST_CASE("mock endpoint over HTTP scores 100 percent") {
  MockOptions mo;
  mo.think = true;
  MockServer server(mo);
  server.start();
  auto cfg = quick_config(3);
  cfg.endpoint.base_url = server.base_url();
  cfg.endpoint.api_key_env.clear();
  const auto dir = scratch("http");
  HttpChatClient client(cfg.endpoint);
  const auto s = run_eval(cfg, options_for(dir), client);
  CHECK(s.complete);
  CHECK(s.failed == 0);
  CHECK(server.requests() == 36);
  server.stop();

  const auto report = grade_run(dir);
  CHECK(report.instances.size() == 12);
  CHECK(report.overall.single_acc == doctest::Approx(100.0));
  CHECK(report.overall.majority_acc == doctest::Approx(100.0));
  CHECK(report.overall.pass_at.at(3) == doctest::Approx(100.0));
  CHECK(report.overall.thought_chars > 0);
  for (const auto& b : report.bins) {
    CHECK(b.instances == 3);
    CHECK(b.single_steps == doctest::Approx(b.gold_steps));
  }
}

TEST_CASE("transport failure is recorded, graded as wrong and retried on request") {
  const auto dir = scratch("transport");
  auto cfg = quick_config(2);
  cfg.limit = 1;
  cfg.retry.max_attempts = 2;
  cfg.endpoint.base_url = "http://127.0.0.1:1";
  cfg.endpoint.timeout_seconds = 2;
  HttpChatClient dead(cfg.endpoint);
  const auto s = run_eval(cfg, options_for(dir), dead);
  CHECK(s.failed == 2);
  CHECK(s.retries == 2);
  const auto records = read_responses(dir);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].ok);
  CHECK(records[0].status == 0);
  CHECK_FALSE(records[0].error.empty());

  const auto failed_report = grade_run(dir);
  CHECK(failed_report.instances.at(0).n_correct == 0);

  MockChatClient live;
  auto opts = options_for(dir);
  CHECK(run_eval(cfg, opts, live).requested == 0);
  opts.retry_failed = true;
  CHECK(run_eval(cfg, opts, live).requested == 2);
  CHECK(grade_run(dir).instances.at(0).n_correct == 2);
}

TEST_CASE("noisy voters: pass@k is monotone and grading replays identically") {
  const auto dir = scratch("noisy");
  MockOptions mo;
  mo.wrong_rate = 0.4;
  mo.seed = 11;
  mo.reasoning_field = true;
  mo.think = true;
  MockChatClient client(mo);
  auto cfg = quick_config(16);
  const auto s = run_eval(cfg, options_for(dir), client);
  CHECK(s.complete);

  const auto report = grade_run(dir);
  CHECK(report.overall.single_acc > 20.0);
  CHECK(report.overall.single_acc < 90.0);
  CHECK(report.overall.thought_chars > 0);
  for (const auto* b : {&report.bins[0], &report.bins[1], &report.bins[2], &report.bins[3],
                        &report.overall}) {
    double prev = -1;
    for (const auto& [k, v] : b->pass_at) {
      CHECK(v >= prev - 1e-9);
      prev = v;
    }
    CHECK(b->pass_at.begin()->second == doctest::Approx(b->single_acc));
  }

  write_grades(report, dir);
  const auto again = grade_run(dir);
  CHECK(to_json(again) == to_json(report));
  CHECK(to_json(read_grades(dir)) == to_json(report));
  const auto summary = read_json_file(dir / "summary.json");
  CHECK(summary["seed"] == 3);
  CHECK(summary["dataset"]["hash"] == dataset_file_hash(small_dataset()));

  const auto files = write_report(report, dir);
  CHECK(files.size() == 9);
  const auto table = tracebench::testing::read_text(dir / "report" / "overview.md");
  CHECK(table.find("majvote@16") != std::string::npos);
  CHECK(table.find("| overall |") != std::string::npos);
  CHECK(table.find(dataset_file_hash(small_dataset())) != std::string::npos);

  // Same config, fresh directory: identical records regardless of schedule.
  const auto dir2 = scratch("noisy2");
  MockChatClient client2(mo);
  auto cfg2 = cfg;
  cfg2.parallelism = 1;
  run_eval(cfg2, options_for(dir2), client2);
  const auto a = read_responses(dir);
  const auto b = read_responses(dir2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]) == to_json(b[i]));
}

TEST_CASE("transduction prompts give the mock nothing to execute") {
  const auto dir = scratch("transduction");
  auto cfg = quick_config(2);
  cfg.variation = Variation::Transduction;
  cfg.limit = 2;
  MockChatClient client;
  run_eval(cfg, options_for(dir), client);
  const auto report = grade_run(dir);
  CHECK(report.overall.single_acc == 0.0);
  CHECK(report.overall.single_steps == 0.0);
}

TEST_CASE("alt-programs runs draw shots from sibling instances") {
  const auto dir = scratch("alt");
  auto cfg = quick_config(2);
  cfg.variation = Variation::AltPrograms;
  cfg.shots = 2;
  cfg.limit = 4;
  MockChatClient client;
  run_eval(cfg, options_for(dir), client);
  const auto records = read_responses(dir);
  REQUIRE(records.size() == 8);
  for (const auto& r : records) {
    REQUIRE(r.shots.size() == 2);
    for (const auto& shot : r.shots) CHECK(shot.instance_id != r.instance_id);
  }
  CHECK(grade_run(dir).overall.single_acc == doctest::Approx(100.0));
}

TEST_CASE("explicit instance selection must exist") {
  const auto dir = scratch("select");
  auto cfg = quick_config(1);
  cfg.instances = {"nope"};
  MockChatClient client;
  CHECK_THROWS_AS(run_eval(cfg, options_for(dir), client), RunError);
  CHECK(client.requests() == 0);
}

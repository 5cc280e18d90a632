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

#include "tracebench/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tracebench/config.hpp"
#include "tracebench/rng.hpp"

namespace tracebench {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::string_view to_string(ThinkMode m) { return m == ThinkMode::On ? "on" : "off"; }

ThinkMode think_mode_from_string(std::string_view s) {
  if (s == "on") return ThinkMode::On;
  if (s == "off") return ThinkMode::Off;
  throw std::invalid_argument("think_mode must be on or off");
}

void check_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      throw std::invalid_argument("unknown " + std::string(what) + " key '" + k + "'");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (voters < 1) throw std::invalid_argument("voters must be at least 1");
  if (!(max_token_multiplier > 0)) throw std::invalid_argument("max_token_multiplier must be > 0");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
  if (shots < 0) throw std::invalid_argument("shots must be non-negative");
  if (temperature < 0) throw std::invalid_argument("temperature must be non-negative");
  if (retry.max_attempts < 1) throw std::invalid_argument("retry.max_attempts must be at least 1");
  if (retry.initial_backoff_ms < 0 || retry.max_backoff_ms < 0 || retry.multiplier < 1.0) {
    throw std::invalid_argument("retry backoff must be non-negative with multiplier >= 1");
  }
  if (endpoint.base_url.empty()) throw std::invalid_argument("endpoint.base_url is required");
}

json run_config_to_json(const RunConfig& cfg) {
  json j{
      {"endpoint",
       {{"base_url", cfg.endpoint.base_url},
        {"path", cfg.endpoint.path},
        {"api_key_env", cfg.endpoint.api_key_env},
        {"timeout_seconds", cfg.endpoint.timeout_seconds},
        {"extra_body", cfg.endpoint.extra_body}}},
      {"model", cfg.model},
      {"voters", cfg.voters},
      {"temperature", cfg.temperature},
      {"think_mode", std::string(to_string(cfg.think_mode))},
      {"assistant_prefix", cfg.assistant_prefix},
      {"continue_final_message", cfg.continue_final_message},
      {"max_token_multiplier", cfg.max_token_multiplier},
      {"parallelism", cfg.parallelism},
      {"retry",
       {{"max_attempts", cfg.retry.max_attempts},
        {"initial_backoff_ms", cfg.retry.initial_backoff_ms},
        {"multiplier", cfg.retry.multiplier},
        {"max_backoff_ms", cfg.retry.max_backoff_ms}}},
      {"shots", cfg.shots},
      {"strategy", std::string(to_string(cfg.strategy))},
      {"variation", std::string(to_string(cfg.variation))},
      {"seed", cfg.seed},
      {"instances", cfg.instances},
  };
  j["limit"] = cfg.limit ? json(*cfg.limit) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j,
             {"endpoint", "model", "voters", "temperature", "think_mode", "assistant_prefix",
              "continue_final_message", "max_token_multiplier", "parallelism", "retry", "shots",
              "strategy", "variation", "seed", "instances", "limit"},
             "run config");
  RunConfig cfg;
  try {
    auto get = [](const json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("endpoint")) {
      const auto& e = j.at("endpoint");
      check_keys(e, {"base_url", "path", "api_key_env", "timeout_seconds", "extra_body"},
                 "endpoint");
      get(e, "base_url", cfg.endpoint.base_url);
      get(e, "path", cfg.endpoint.path);
      get(e, "api_key_env", cfg.endpoint.api_key_env);
      get(e, "timeout_seconds", cfg.endpoint.timeout_seconds);
      if (e.contains("extra_body")) cfg.endpoint.extra_body = e.at("extra_body");
    }
    get(j, "model", cfg.model);
    get(j, "voters", cfg.voters);
    get(j, "temperature", cfg.temperature);
    if (j.contains("think_mode")) {
      cfg.think_mode = think_mode_from_string(j.at("think_mode").get<std::string>());
    }
    get(j, "assistant_prefix", cfg.assistant_prefix);
    get(j, "continue_final_message", cfg.continue_final_message);
    get(j, "max_token_multiplier", cfg.max_token_multiplier);
    get(j, "parallelism", cfg.parallelism);
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      check_keys(r, {"max_attempts", "initial_backoff_ms", "multiplier", "max_backoff_ms"},
                 "retry");
      get(r, "max_attempts", cfg.retry.max_attempts);
      get(r, "initial_backoff_ms", cfg.retry.initial_backoff_ms);
      get(r, "multiplier", cfg.retry.multiplier);
      get(r, "max_backoff_ms", cfg.retry.max_backoff_ms);
    }
    get(j, "shots", cfg.shots);
    if (j.contains("strategy")) {
      cfg.strategy = shot_kind_from_string(j.at("strategy").get<std::string>());
    }
    if (j.contains("variation")) {
      cfg.variation = variation_from_string(j.at("variation").get<std::string>());
    }
    get(j, "seed", cfg.seed);
    get(j, "instances", cfg.instances);
    if (j.contains("limit") && !j.at("limit").is_null()) {
      cfg.limit = j.at("limit").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

int max_output_tokens(const Trace& gold, double multiplier) {
  const auto est = static_cast<double>(estimate_tokens(trace_to_text(gold)));
  return std::max(1, static_cast<int>(std::ceil(multiplier * est)));
}

json build_payload(const PromptBundle& bundle, const RunConfig& cfg, int max_tokens) {
  json messages = json::array({{{"role", "user"}, {"content", bundle.prompt}}});
  json payload{{"model", cfg.model},
               {"temperature", cfg.temperature},
               {"max_tokens", max_tokens}};
  if (cfg.think_mode == ThinkMode::Off) {
    messages.push_back({{"role", "assistant"}, {"content", cfg.assistant_prefix}});
    if (cfg.continue_final_message) {
      payload["continue_final_message"] = true;
      payload["add_generation_prompt"] = false;
    }
  }
  payload["messages"] = std::move(messages);
  if (!cfg.endpoint.extra_body.empty()) payload.merge_patch(cfg.endpoint.extra_body);
  return payload;
}

std::optional<std::string> extract_reply_text(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() ||
      body["choices"].empty()) {
    return std::nullopt;
  }
  const auto& choice = body["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    return std::nullopt;
  }
  const auto& msg = choice["message"];
  std::string text;
  for (const char* key : {"reasoning_content", "reasoning"}) {
    if (msg.contains(key) && msg[key].is_string() && !msg[key].get<std::string>().empty()) {
      text = "<think>" + msg[key].get<std::string>() + "</think>";
      break;
    }
  }
  if (msg.contains("content") && msg["content"].is_string()) {
    text += msg["content"].get<std::string>();
  } else if (!msg.contains("content") || !msg["content"].is_null()) {
    return std::nullopt;
  }
  return text;
}

RequestOutcome issue_request(ChatClient& client, const json& payload, const RetryPolicy& policy,
                             const std::function<void(std::chrono::milliseconds)>& sleep) {
  RequestOutcome out;
  double backoff = policy.initial_backoff_ms;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    out.attempts = attempt;
    const auto reply = client.post(payload);
    out.last_status = reply.status;
    bool retryable = false;
    if (reply.status == 0) {
      out.error = "transport error: " + reply.error;
      retryable = true;
    } else if (reply.status == 200) {
      json body = json::parse(reply.body, nullptr, false);
      if (auto text = body.is_discarded() ? std::nullopt : extract_reply_text(body)) {
        out.ok = true;
        out.text = std::move(*text);
        out.error.clear();
        return out;
      }
      out.error = "malformed completion body";
      return out;
    } else {
      out.error = "HTTP " + std::to_string(reply.status);
      retryable = reply.status == 408 || reply.status == 429 || reply.status >= 500;
    }
    if (!retryable || attempt == policy.max_attempts) break;
    const auto wait = std::chrono::milliseconds(
        static_cast<long long>(std::min<double>(backoff, policy.max_backoff_ms)));
    if (sleep) {
      sleep(wait);
    } else {
      std::this_thread::sleep_for(wait);
    }
    backoff *= policy.multiplier;
  }
  return out;
}

json to_json(const ResponseRecord& r) {
  json shots = json::array();
  for (const auto& s : r.shots) shots.push_back({s.instance_id, s.exemplar});
  return {{"instance_id", r.instance_id}, {"voter", r.voter},
          {"status", r.ok ? "ok" : "failed"}, {"response", r.response},
          {"attempts", r.attempts},       {"retries", r.retries},
          {"http_status", r.status},      {"error", r.error},
          {"shots", shots},               {"max_tokens", r.max_tokens},
          {"prompt_tokens", r.prompt_tokens}};
}

ResponseRecord response_record_from_json(const json& j) {
  ResponseRecord r;
  r.instance_id = j.at("instance_id").get<std::string>();
  r.voter = j.at("voter").get<int>();
  const auto status = j.at("status").get<std::string>();
  if (status != "ok" && status != "failed") throw std::invalid_argument("bad status " + status);
  r.ok = status == "ok";
  r.response = j.at("response").get<std::string>();
  r.attempts = j.value("attempts", 0);
  r.retries = j.value("retries", 0);
  r.status = j.value("http_status", 0);
  r.error = j.value("error", std::string());
  if (j.contains("shots")) {
    for (const auto& s : j.at("shots")) r.shots.push_back({s.at(0).get<std::string>(), s.at(1).get<int>()});
  }
  r.max_tokens = j.value("max_tokens", 0);
  r.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
  return r;
}

namespace {

std::filesystem::path responses_path(const std::filesystem::path& dir) {
  return dir / "responses.jsonl";
}
std::filesystem::path manifest_path(const std::filesystem::path& dir) {
  return dir / "manifest.json";
}

// Fields that define what a run produces; endpoint, parallelism and retry
// settings may change between resumes.
std::string config_identity(const RunConfig& cfg) {
  auto j = run_config_to_json(cfg);
  j.erase("endpoint");
  j.erase("parallelism");
  j.erase("retry");
  return hex64(fnv1a64(j.dump()));
}

void write_json_atomic(const std::filesystem::path& path, const json& j) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

json bins_to_json(const std::vector<BinSpec>& bins) {
  json out = json::array();
  for (const auto& b : bins) {
    out.push_back({{"label", b.label},
                   {"lo", b.lo},
                   {"hi", b.hi},
                   {"target_count", b.target_count},
                   {"target_mean", b.target_mean}});
  }
  return out;
}

std::vector<BinSpec> bins_from_json(const json& j) {
  std::vector<BinSpec> out;
  for (const auto& b : j) {
    out.push_back({b.at("label").get<std::string>(), b.at("lo").get<int>(), b.at("hi").get<int>(),
                   b.at("target_count").get<int>(), b.at("target_mean").get<double>()});
  }
  return out;
}

struct ParsedResponses {
  std::vector<ResponseRecord> records;
  std::vector<std::uint64_t> offsets;
  std::uint64_t valid_bytes = 0;  // length of the intact prefix of the file
};

ParsedResponses parse_responses(const std::filesystem::path& path) {
  ParsedResponses out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::uint64_t offset = 0;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const bool terminated = !in.eof();
    json j = json::parse(line, nullptr, false);
    if (!terminated || j.is_discarded()) {
      // A torn write can only be the final line.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw RunError("responses.jsonl record " + std::to_string(index) + " is corrupt");
    }
    try {
      out.records.push_back(response_record_from_json(j));
    } catch (const std::exception& e) {
      throw RunError("responses.jsonl record " + std::to_string(index) + ": " + e.what());
    }
    out.offsets.push_back(offset);
    offset += line.size() + 1;
    out.valid_bytes = offset;
    ++index;
  }
  return out;
}

using PairKey = std::pair<std::string, int>;

}  // namespace

std::vector<ResponseRecord> read_responses(const std::filesystem::path& run_dir) {
  auto parsed = parse_responses(responses_path(run_dir));
  std::map<PairKey, std::size_t> last;
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    last[{parsed.records[i].instance_id, parsed.records[i].voter}] = i;
  }
  std::vector<ResponseRecord> out;
  out.reserve(last.size());
  for (const auto& [key, i] : last) out.push_back(std::move(parsed.records[i]));
  return out;
}

RunSummary run_eval(const RunConfig& cfg, const RunOptions& options, ChatClient& client) {
  cfg.validate();
  const auto strategy = cfg.shot_strategy();
  const auto dataset_hash = dataset_file_hash(options.dataset);
  const auto identity = config_identity(cfg);
  const auto run_id = hex64(fnv1a64(identity + ":" + dataset_hash));

  std::filesystem::create_directories(options.out_dir);
  const auto mpath = manifest_path(options.out_dir);
  if (std::filesystem::exists(mpath)) {
    json old;
    try {
      old = read_json_file(mpath);
    } catch (const std::exception& e) {
      throw RunError(std::string("unreadable manifest: ") + e.what());
    }
    if (old.value("/dataset/hash"_json_pointer, std::string()) != dataset_hash) {
      throw RunError("dataset hash " + dataset_hash + " does not match the run's recorded hash " +
                     old.value("/dataset/hash"_json_pointer, std::string("<none>")));
    }
    if (old.value("config_identity", std::string()) != identity) {
      throw RunError("run config differs from the one recorded in " + mpath.string());
    }
  }

  // Select instances; alt-programs keeps the whole set for sibling lookups.
  DatasetHeader header;
  std::vector<TaskInstance> all;
  const bool need_all = cfg.variation == Variation::AltPrograms;
  std::set<std::string> wanted(cfg.instances.begin(), cfg.instances.end());
  std::vector<std::string> order;
  scan_dataset(
      options.dataset, [&](const DatasetHeader& h) { header = h; },
      [&](TaskInstance&& inst) {
        const bool picked = wanted.empty() || wanted.count(inst.id);
        const bool within = !cfg.limit || order.size() < *cfg.limit;
        if (picked && within) order.push_back(inst.id);
        if ((picked && within) || need_all) all.push_back(std::move(inst));
      });
  for (const auto& id : cfg.instances) {
    if (std::find(order.begin(), order.end(), id) == order.end() &&
        (!cfg.limit || order.size() < *cfg.limit)) {
      throw RunError("instance " + id + " is not in the dataset");
    }
  }
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& inst : all) by_id[inst.id] = &inst;

  json manifest{{"schema_version", kManifestVersion},
                {"run_id", run_id},
                {"config", run_config_to_json(cfg)},
                {"config_identity", identity},
                {"dataset",
                 {{"path", std::filesystem::absolute(options.dataset).string()},
                  {"hash", dataset_hash},
                  {"cfg_hash", header.cfg_hash},
                  {"seed", header.seed}}},
                {"bins", bins_to_json(header.bins)},
                {"voters", cfg.voters},
                {"instance_ids", order}};
  write_json_atomic(mpath, manifest);

  // Drop a torn trailing record before appending.
  const auto rpath = responses_path(options.out_dir);
  auto existing = parse_responses(rpath);
  if (std::filesystem::exists(rpath) &&
      std::filesystem::file_size(rpath) != existing.valid_bytes) {
    std::filesystem::resize_file(rpath, existing.valid_bytes);
  }
  std::map<PairKey, bool> done;  // pair -> last record ok
  for (const auto& r : existing.records) done[{r.instance_id, r.voter}] = r.ok;

  RunSummary summary;
  summary.run_id = run_id;
  summary.planned = order.size() * static_cast<std::size_t>(cfg.voters);
  std::vector<std::pair<const TaskInstance*, int>> work;
  for (const auto& id : order) {
    for (int v = 0; v < cfg.voters; ++v) {
      auto it = done.find({id, v});
      if (it != done.end() && (it->second || !options.retry_failed)) {
        ++summary.already_done;
        continue;
      }
      work.emplace_back(by_id.at(id), v);
    }
  }

  std::ofstream out(rpath, std::ios::binary | std::ios::app);
  if (!out) throw RunError("cannot append to " + rpath.string());
  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> claimed{0};
  std::exception_ptr failure;
  const std::size_t budget = options.max_new_records.value_or(work.size());

  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= work.size()) return;
      if (claimed.fetch_add(1) >= budget) return;
      const auto& [inst, voter] = work[i];
      ResponseRecord rec;
      rec.instance_id = inst->id;
      rec.voter = voter;
      try {
        std::vector<const TaskInstance*> siblings;
        if (need_all) siblings = same_bin_siblings(*inst, all);
        const auto bundle =
            render_prompt(*inst, strategy, cfg.variation, voter, cfg.seed, siblings);
        rec.shots = bundle.shots;
        rec.prompt_tokens = estimate_prompt_tokens(bundle);
        rec.max_tokens = max_output_tokens(inst->test.trace, cfg.max_token_multiplier);
        const auto outcome =
            issue_request(client, build_payload(bundle, cfg, rec.max_tokens), cfg.retry,
                          options.sleep);
        rec.ok = outcome.ok;
        rec.response = outcome.text;
        rec.attempts = outcome.attempts;
        rec.retries = std::max(0, outcome.attempts - 1);
        rec.status = outcome.last_status;
        rec.error = outcome.error;
      } catch (...) {
        std::lock_guard lock(write_mu);
        if (!failure) failure = std::current_exception();
        next = work.size();
        return;
      }
      std::lock_guard lock(write_mu);
      out << to_json(rec).dump() << '\n';
      out.flush();
      ++summary.requested;
      summary.retries += static_cast<std::size_t>(rec.retries);
      if (!rec.ok) ++summary.failed;
    }
  };
  const int threads = std::min<int>(cfg.parallelism, static_cast<int>(std::max<std::size_t>(1, work.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.close();
  if (failure) std::rethrow_exception(failure);

  // Final manifest: per-pair status and record offsets.
  auto parsed = parse_responses(rpath);
  std::map<PairKey, std::pair<bool, std::uint64_t>> latest;
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    latest[{parsed.records[i].instance_id, parsed.records[i].voter}] = {parsed.records[i].ok,
                                                                        parsed.offsets[i]};
  }
  json records = json::array();
  std::size_t ok = 0, failed = 0;
  for (const auto& id : order) {
    for (int v = 0; v < cfg.voters; ++v) {
      auto it = latest.find({id, v});
      if (it == latest.end()) continue;
      records.push_back({{"instance_id", id},
                         {"voter", v},
                         {"status", it->second.first ? "ok" : "failed"},
                         {"offset", it->second.second}});
      (it->second.first ? ok : failed)++;
    }
  }
  summary.complete = ok + failed == summary.planned;
  manifest["status"] = {{"planned", summary.planned},
                        {"ok", ok},
                        {"failed", failed},
                        {"missing", summary.planned - ok - failed},
                        {"complete", summary.complete}};
  manifest["records"] = std::move(records);
  write_json_atomic(mpath, manifest);
  return summary;
}

GradeReport grade_run(const std::filesystem::path& run_dir,
                      const std::optional<std::filesystem::path>& dataset_override) {
  const auto mpath = manifest_path(run_dir);
  if (!std::filesystem::exists(mpath)) throw RunError("no manifest.json in " + run_dir.string());
  const json manifest = read_json_file(mpath);
  const auto dataset = dataset_override
                           ? *dataset_override
                           : std::filesystem::path(manifest.at("dataset").at("path").get<std::string>());
  const auto expected = manifest.at("dataset").at("hash").get<std::string>();
  const auto actual = dataset_file_hash(dataset);
  if (actual != expected) {
    throw RunError("dataset " + dataset.string() + " has hash " + actual + ", run expects " +
                   expected);
  }
  const auto ids = manifest.at("instance_ids").get<std::vector<std::string>>();
  const int voters = manifest.at("voters").get<int>();
  const auto bins = bins_from_json(manifest.at("bins"));

  std::map<std::string, std::pair<std::string, Trace>> gold;  // id -> (bin, trace)
  const std::set<std::string> wanted(ids.begin(), ids.end());
  scan_dataset(dataset, {}, [&](TaskInstance&& inst) {
    if (wanted.count(inst.id)) gold[inst.id] = {inst.bin, std::move(inst.test.trace)};
  });

  std::map<PairKey, ResponseRecord> responses;
  for (auto& r : read_responses(run_dir)) {
    auto key = PairKey{r.instance_id, r.voter};
    responses.emplace(std::move(key), std::move(r));
  }
  std::size_t missing = 0;
  std::string first_gap;
  for (const auto& id : ids) {
    for (int v = 0; v < voters; ++v) {
      if (!responses.count({id, v})) {
        if (missing++ == 0) first_gap = "instance " + id + " voter " + std::to_string(v);
      }
    }
  }
  if (missing > 0) {
    throw RunError("run is incomplete: missing response for " + first_gap + " (" +
                   std::to_string(missing) + " missing in total)");
  }

  std::vector<InstanceGrade> grades;
  for (const auto& id : ids) {
    auto it = gold.find(id);
    if (it == gold.end()) throw RunError("instance " + id + " is not in the dataset");
    std::vector<std::string> texts;
    for (int v = 0; v < voters; ++v) {
      const auto& r = responses.at({id, v});
      texts.push_back(r.ok ? r.response : std::string());
    }
    grades.push_back(grade_instance(id, it->second.first, it->second.second, texts));
  }
  return aggregate(std::move(grades), bins);
}

void write_grades(const GradeReport& report, const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "grades.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write grades.jsonl");
    for (const auto& g : report.instances) out << to_json(g).dump() << '\n';
  }
  json summary = to_json(report);
  const auto mpath = manifest_path(run_dir);
  if (std::filesystem::exists(mpath)) {
    const auto m = read_json_file(mpath);
    summary["run_id"] = m.value("run_id", std::string());
    summary["dataset"] = m.value("dataset", json::object());
    summary["seed"] = m.value("/config/seed"_json_pointer, std::uint64_t{0});
    summary["model"] = m.value("/config/model"_json_pointer, std::string());
    summary["bin_specs"] = m.value("bins", json::array());
  }
  write_json_atomic(run_dir / "summary.json", summary);
}

GradeReport read_grades(const std::filesystem::path& run_dir) {
  const auto summary_path = run_dir / "summary.json";
  const auto grades_path = run_dir / "grades.jsonl";
  if (!std::filesystem::exists(summary_path) || !std::filesystem::exists(grades_path)) {
    throw RunError("run " + run_dir.string() + " has not been graded yet");
  }
  const auto summary = read_json_file(summary_path);
  std::vector<BinSpec> bins;
  if (summary.contains("bin_specs")) {
    bins = bins_from_json(summary.at("bin_specs"));
  } else {
    for (const auto& b : summary.at("bins")) {
      bins.push_back({b.at("label").get<std::string>(), 0, 0, 1, 0});
    }
  }
  std::vector<InstanceGrade> grades;
  std::ifstream in(grades_path);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) grades.push_back(instance_grade_from_json(json::parse(line)));
  }
  return aggregate(std::move(grades), bins);
}

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Provenance {
  std::string line;  // one-line summary for file headers
  json data;
};

Provenance provenance(const std::filesystem::path& run_dir) {
  Provenance p;
  const auto mpath = manifest_path(run_dir);
  if (!std::filesystem::exists(mpath)) return p;
  const auto m = read_json_file(mpath);
  p.data = {{"run_id", m.value("run_id", std::string())},
            {"model", m.value("/config/model"_json_pointer, std::string())},
            {"seed", m.value("/config/seed"_json_pointer, std::uint64_t{0})},
            {"dataset_hash", m.value("/dataset/hash"_json_pointer, std::string())},
            {"cfg_hash", m.value("/dataset/cfg_hash"_json_pointer, std::string())},
            {"dataset_seed", m.value("/dataset/seed"_json_pointer, std::uint64_t{0})}};
  p.line = "run " + p.data["run_id"].get<std::string>() + ", model " +
           p.data["model"].get<std::string>() + ", seed " +
           std::to_string(p.data["seed"].get<std::uint64_t>()) + ", dataset " +
           p.data["dataset_hash"].get<std::string>() + " (cfg " +
           p.data["cfg_hash"].get<std::string>() + ", seed " +
           std::to_string(p.data["dataset_seed"].get<std::uint64_t>()) + ")";
  return p;
}

std::vector<const BinSummary*> rows(const GradeReport& r) {
  std::vector<const BinSummary*> out;
  for (const auto& b : r.bins) out.push_back(&b);
  out.push_back(&r.overall);
  return out;
}

double at_or_zero(const std::map<int, double>& m, int k) {
  auto it = m.find(k);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

std::string overview_markdown(const GradeReport& r) {
  const auto n = std::to_string(r.voters);
  std::ostringstream md;
  md << "| Split | Instances | Gold steps | Steps to Err. single | Steps to Err. majvote@" << n
     << " | Trace Acc. single | Trace Acc. majvote@" << n << " | pass@" << n << " |\n";
  md << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto* b : rows(r)) {
    md << "| " << b->label << " | " << b->instances << " | " << fmt(b->gold_steps, 1) << " | "
       << fmt(b->single_steps, 1) << " | " << fmt(b->majority_steps, 1) << " | "
       << fmt(b->single_acc, 1) << " | " << fmt(b->majority_acc, 1) << " | "
       << fmt(at_or_zero(b->pass_at, r.voters), 1) << " |\n";
  }
  return md.str();
}

std::vector<std::filesystem::path> write_report(const GradeReport& r,
                                                const std::filesystem::path& run_dir) {
  const auto dir = run_dir / "report";
  std::filesystem::create_directories(dir);
  const auto prov = provenance(run_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& body, bool markdown) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + (dir / name).string());
    if (!prov.line.empty()) out << (markdown ? "<!-- " : "# ") << prov.line << (markdown ? " -->\n\n" : "\n");
    out << body;
    written.push_back(dir / name);
  };
  const auto n = r.voters;
  const auto ks = default_ks(std::max(1, n));

  // Per-bin overview.
  emit("overview.md", overview_markdown(r), true);
  {
    std::ostringstream csv;
    csv << "split,instances,gold_steps,steps_single,steps_majvote,acc_single,acc_majvote,pass_at_n\n";
    for (const auto* b : rows(r)) {
      csv << b->label << ',' << b->instances << ',' << fmt(b->gold_steps, 4) << ','
          << fmt(b->single_steps, 4) << ',' << fmt(b->majority_steps, 4) << ','
          << fmt(b->single_acc, 4) << ',' << fmt(b->majority_acc, 4) << ','
          << fmt(at_or_zero(b->pass_at, n), 4) << '\n';
    }
    emit("overview.csv", csv.str(), false);
  }

  // Accuracy by bin.
  {
    std::ostringstream csv, md;
    csv << "bin,gold_steps,acc_single,acc_majvote,pass_at_n,steps_single\n";
    md << "| Bin | Gold steps | Acc. single | Acc. majvote@" << n << " | pass@" << n
       << " | Steps single |\n|---|---:|---:|---:|---:|---:|\n";
    for (const auto& b : r.bins) {
      csv << b.label << ',' << fmt(b.gold_steps, 4) << ',' << fmt(b.single_acc, 4) << ','
          << fmt(b.majority_acc, 4) << ',' << fmt(at_or_zero(b.pass_at, n), 4) << ','
          << fmt(b.single_steps, 4) << '\n';
      md << "| " << b.label << " | " << fmt(b.gold_steps, 1) << " | " << fmt(b.single_acc, 1)
         << " | " << fmt(b.majority_acc, 1) << " | " << fmt(at_or_zero(b.pass_at, n), 1) << " | "
         << fmt(b.single_steps, 1) << " |\n";
    }
    emit("by_bin.csv", csv.str(), false);
    emit("by_bin.md", md.str(), true);
  }

  // Accuracy by voter count.
  {
    std::ostringstream csv, md;
    csv << "split,k,maj_at_k,pass_at_k\n";
    md << "| Split |";
    for (int k : ks) md << " pass@" << k << " |";
    for (int k : ks) md << " maj@" << k << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < 2 * ks.size(); ++i) md << "---:|";
    md << '\n';
    for (const auto* b : rows(r)) {
      md << "| " << b->label << " |";
      for (int k : ks) md << ' ' << fmt(at_or_zero(b->pass_at, k), 2) << " |";
      for (int k : ks) md << ' ' << fmt(at_or_zero(b->maj_at, k), 2) << " |";
      md << '\n';
      for (int k : ks) {
        csv << b->label << ',' << k << ',' << fmt(at_or_zero(b->maj_at, k), 4) << ','
            << fmt(at_or_zero(b->pass_at, k), 4) << '\n';
      }
    }
    emit("by_voters.csv", csv.str(), false);
    emit("by_voters.md", md.str(), true);
  }

  // Thought statistics.
  {
    std::ostringstream csv, md;
    csv << "split,thought_chars,thought_chunks\n";
    md << "| Split | Thought chars | Thought chunks |\n|---|---:|---:|\n";
    for (const auto* b : rows(r)) {
      csv << b->label << ',' << fmt(b->thought_chars, 2) << ',' << fmt(b->thought_chunks, 2) << '\n';
      md << "| " << b->label << " | " << fmt(b->thought_chars, 1) << " | "
         << fmt(b->thought_chunks, 1) << " |\n";
    }
    emit("thoughts.csv", csv.str(), false);
    emit("thoughts.md", md.str(), true);
  }

  {
    json j = to_json(r);
    j["provenance"] = prov.data;
    std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    written.push_back(dir / "summary.json");
  }
  return written;
}

}  // namespace tracebench

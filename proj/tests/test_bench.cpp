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

#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"
#include "tracebench/bench.hpp"
#include "tracebench/config.hpp"

using namespace tracebench;

namespace {

Program listing(std::vector<std::string> lines) { return parse_program(lines); }

SplitConfig small_split(std::uint64_t seed, int per_bin = 3) {
  SplitConfig cfg;
  cfg.gen.seed = seed;
  cfg.build.pool_size = 8;
  for (auto& b : cfg.bins) b.target_count = per_bin;
  return cfg;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tracebench_test_bench";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("default bins are valid and disjoint") {
  const auto bins = default_bins();
  REQUIRE(bins.size() == 4);
  CHECK_NOTHROW(validate_bins(bins));
  CHECK(bins[0].label == "short");
  CHECK(bins[3].label == "xlong");
  double sum = 0;
  for (const auto& b : bins) {
    CHECK(b.target_count == 500);
    sum += b.target_mean;
  }
  CHECK(sum / 4 == doctest::Approx(125.75));
}

TEST_CASE("bin validation rejects bad specs") {
  CHECK_THROWS_AS(validate_bins({}), std::invalid_argument);
  CHECK_THROWS_AS(validate_bins({{"a", 5, 4, 1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_bins({{"a", 1, 10, 1, 0}, {"b", 10, 20, 1, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_bins({{"a", 1, 10, 1, 0}, {"a", 11, 20, 1, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_bins({{"a", 1, 10, 0, 0}}), std::invalid_argument);
}

TEST_CASE("bin assignment is a pure function of the step count") {
  const auto bins = default_bins();
  CHECK(assign_bin(4, bins) == std::nullopt);
  CHECK(assign_bin(5, bins) == 0u);
  CHECK(assign_bin(30, bins) == 0u);
  CHECK(assign_bin(31, bins) == std::nullopt);
  CHECK(assign_bin(59, bins) == std::nullopt);
  CHECK(assign_bin(60, bins) == 1u);
  CHECK(assign_bin(190, bins) == 2u);
  CHECK(assign_bin(220, bins) == 3u);
  CHECK(assign_bin(276, bins) == std::nullopt);
  for (int n = 0; n < 400; ++n) CHECK(assign_bin(n, bins) == assign_bin(n, bins));
}

TEST_CASE("append-only program accepts the first sampled input") {
  const Program p = listing({"L1 def function(a, lst_x):", "L2     lst_x.append(3)",
                             "L3     return"});
  GenConfig cfg;
  BuildOptions opts;
  opts.pool_size = 1;
  Rng rng(42);
  auto inst = build_instance_for(p, cfg, opts, rng);
  REQUIRE(inst);

  Rng replay(42);
  const auto first = sample_inputs(p, cfg, replay);
  CHECK(inst->test.args == first);
  CHECK(inst->test.trace.size() == 2);
  CHECK(inst->pool.size() == 1);
}

TEST_CASE("program popping 11 times always errors and is skipped") {
  std::vector<std::string> lines{"L1 def function(lst_x):"};
  for (int i = 0; i < 11; ++i) {
    lines.push_back("L" + std::to_string(i + 2) + "     lst_x.pop()");
  }
  lines.push_back("L13     return");
  const Program p = listing(lines);
  GenConfig cfg;
  REQUIRE(cfg.list_len_range.second < 11);
  BuildOptions opts;
  Rng rng(7);
  CHECK_FALSE(build_instance_for(p, cfg, opts, rng));
}

TEST_CASE("default-config instance re-executes to its stored traces") {
  GenConfig cfg;
  cfg.seed = 11;
  BuildOptions opts;
  int built = 0;
  for (std::uint64_t s = 0; built < 5 && s < 200; ++s) {
    Rng rng(derive_seed(cfg.seed, s));
    auto inst = build_instance(cfg, opts, rng);
    if (!inst) continue;
    ++built;
    REQUIRE(inst->pool.size() == 64);
    std::vector<std::vector<Value>> distinct;
    auto check = [&](const Exemplar& ex) {
      auto result = execute(inst->program, ex.args);
      REQUIRE(std::holds_alternative<Trace>(result));
      CHECK(std::get<Trace>(result) == ex.trace);
      CHECK(ex.call_text == render_call(inst->program.params(), ex.args));
      for (const auto& seen : distinct) CHECK(seen != ex.args);
      distinct.push_back(ex.args);
    };
    check(inst->test);
    for (const auto& ex : inst->pool) check(ex);
    CHECK(distinct.size() == 65);
    CHECK(inst->n_steps == static_cast<int>(inst->test.trace.size()));
    CHECK(verify_instance(*inst) == std::nullopt);
  }
  CHECK(built == 5);
}

TEST_CASE("verify_instance reports tampering") {
  auto instances = build_split(small_split(3, 1));
  REQUIRE(!instances.empty());
  auto inst = instances.front();
  inst.pool[2].trace.steps.back().line += 1;
  auto msg = verify_instance(inst);
  REQUIRE(msg);
  CHECK(msg->find("pool[2]") != std::string::npos);

  inst = instances.front();
  inst.test.args = inst.pool[0].args;
  inst.test.call_text = inst.pool[0].call_text;
  inst.test.trace = inst.pool[0].trace;
  msg = verify_instance(inst);
  REQUIRE(msg);
  CHECK(msg->find("duplicate") != std::string::npos);
}

TEST_CASE("degenerate single bin fills with any lengths") {
  SplitConfig cfg;
  cfg.gen.seed = 5;
  cfg.build.pool_size = 4;
  cfg.bins = {{"all", 1, 1'000'000, 10, 0.0}};
  const auto instances = build_split(cfg);
  CHECK(instances.size() == 10);
  for (const auto& inst : instances) CHECK(inst.bin == "all");
}

TEST_CASE("split output is sorted, binned and schedule independent") {
  const auto cfg = small_split(9);
  const auto a = build_split(cfg);
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto b = assign_bin(a[i].n_steps, cfg.bins);
    REQUIRE(b);
    CHECK(cfg.bins[*b].label == a[i].bin);
    CHECK(a[i].pool.size() == 8);
    if (i > 0) {
      const auto prev = *assign_bin(a[i - 1].n_steps, cfg.bins);
      CHECK((prev < *b || (prev == *b && a[i - 1].id < a[i].id)));
    }
  }
  auto threaded = cfg;
  threaded.threads = 3;
  CHECK(build_split(threaded) == a);
  CHECK(build_split(cfg) == a);
  auto other = cfg;
  other.gen.seed = 10;
  CHECK(build_split(other) != a);
}

TEST_CASE("split exhaustion is reported") {
  SplitConfig cfg;
  cfg.gen.seed = 1;
  cfg.build.pool_size = 2;
  cfg.bins = {{"huge", 5000, 6000, 1, 0.0}};
  cfg.max_attempts = 300;
  CHECK_THROWS_AS(build_split(cfg), GenerationExhausted);
}

TEST_CASE("dataset save and load round-trip") {
  const auto cfg = small_split(21);
  const auto ds = make_dataset(cfg, build_split(cfg));
  CHECK(ds.header.cfg_hash == config_hash(cfg.gen));
  CHECK(ds.header.seed == 21);

  const auto path = temp_path("roundtrip.jsonl");
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  CHECK(back == ds);
  CHECK(serialize_dataset(back) == serialize_dataset(ds));
  CHECK(parse_dataset(serialize_dataset(ds)) == ds);
  REQUIRE(back.find(ds.instances[3].id) != nullptr);
  CHECK(back.find("nope") == nullptr);

  std::vector<std::string> ids;
  scan_dataset(
      path, [&](const DatasetHeader& h) { CHECK(h == ds.header); },
      [&](TaskInstance&& inst) { ids.push_back(inst.id); });
  CHECK(ids.size() == ds.instances.size());
}

TEST_CASE("streamed split writing matches the in-memory path byte for byte") {
  const auto cfg = small_split(33, 2);
  const auto a = temp_path("streamed.jsonl");
  const auto b = temp_path("in_memory.jsonl");
  CHECK(write_split(cfg, a) == 8);
  save_dataset(make_dataset(cfg, build_split(cfg)), b);
  CHECK(tracebench::testing::read_text(a) == tracebench::testing::read_text(b));
  CHECK(dataset_file_hash(a) == dataset_file_hash(b));
  CHECK(dataset_file_hash(a).size() == 16);
}

TEST_CASE("dataset header records seed, config and bins") {
  const auto cfg = small_split(4, 1);
  const auto text = serialize_dataset(make_dataset(cfg, build_split(cfg)));
  const auto lines = split_lines(text);
  REQUIRE(lines.size() == 5);
  const auto header = nlohmann::json::parse(lines[0]);
  CHECK(header["type"] == "header");
  CHECK(header["schema_version"] == kDatasetSchemaVersion);
  CHECK(header["seed"] == 4);
  CHECK(header["bins"].size() == 4);
  CHECK(gen_config_from_json(header["cfg"]) == cfg.gen);
  const auto record = nlohmann::json::parse(lines[1]);
  for (const char* key : {"id", "program_lines", "params", "bin", "n_steps", "exemplars", "test",
                          "cfg_hash", "seed"}) {
    CHECK_MESSAGE(record.contains(key), key);
  }
  CHECK(record["test"].contains("call_text"));
  CHECK(record["test"].contains("trace_lines"));
}

TEST_CASE("missing gold trace field names the record") {
  const auto cfg = small_split(4, 1);
  auto lines = split_lines(serialize_dataset(make_dataset(cfg, build_split(cfg))));
  auto record = nlohmann::json::parse(lines[2]);
  const std::string id = record["id"];
  record["test"].erase("trace_lines");
  lines[2] = record.dump();
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  try {
    parse_dataset(text);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.record_index() == 2);
    const std::string what = e.what();
    CHECK(what.find(id) != std::string::npos);
    CHECK(what.find("trace_lines") != std::string::npos);
  }
}

TEST_CASE("schema mismatch and corrupt records are rejected") {
  const auto cfg = small_split(4, 1);
  auto lines = split_lines(serialize_dataset(make_dataset(cfg, build_split(cfg))));
  auto join = [](const std::vector<std::string>& ls) {
    std::string t;
    for (const auto& l : ls) t += l + "\n";
    return t;
  };

  auto bumped = lines;
  auto header = nlohmann::json::parse(bumped[0]);
  header["schema_version"] = kDatasetSchemaVersion + 1;
  bumped[0] = header.dump();
  try {
    parse_dataset(join(bumped));
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.record_index() == 0);
    CHECK(std::string(e.what()).find("schema version") != std::string::npos);
  }

  auto corrupt = lines;
  corrupt[3] = corrupt[3].substr(0, corrupt[3].size() / 2);
  try {
    parse_dataset(join(corrupt));
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.record_index() == 3);
  }

  auto bad_trace = lines;
  auto record = nlohmann::json::parse(bad_trace[1]);
  record["exemplars"][0]["trace_lines"][0] = "L2 oops";
  bad_trace[1] = record.dump();
  CHECK_THROWS_AS(parse_dataset(join(bad_trace)), DatasetError);

  CHECK_THROWS_AS(parse_dataset(""), DatasetError);
}

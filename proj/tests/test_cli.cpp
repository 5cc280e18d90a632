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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>

#include "test_support.hpp"
#include "tracebench/mock_server.hpp"
#include "tracebench/runner.hpp"

using namespace tracebench;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

const std::filesystem::path& work_dir() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / "tracebench_test_cli";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

Result cli(const std::string& args, const std::string& env = {}) {
  const auto err_path = work_dir() / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + TRACEBENCH_CLI + " " + args + " 2>" +
                          err_path.string();
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = tracebench::testing::read_text(err_path);
  return r;
}

json first_json_line(const std::string& text) {
  return json::parse(text.substr(0, text.find('\n')));
}

const std::filesystem::path& small_dataset() {
  static const auto path = [] {
    const auto r = cli("gen --seed 5 --per-bin 2 --pool-size 6 --out " + (work_dir() / "small").string());
    REQUIRE(r.status == 0);
    return work_dir() / "small" / "dataset.jsonl";
  }();
  return path;
}

std::string oracle_cmd() {
  return "--oracle-cmd 'python3 " + std::string(TRACEBENCH_FIXTURES_DIR) + "/fake_oracle.py'";
}

}  // namespace

TEST_CASE("gen is deterministic for a fixed config and seed") {
  const auto a = work_dir() / "gen_a";
  const auto b = work_dir() / "gen_b";
  const auto c = work_dir() / "gen_c";
  const std::string common = " --config " + std::string(TRACEBENCH_CONFIGS_DIR) +
                             "/base.json --per-bin 3 --pool-size 5";
  const auto ra = cli("gen" + common + " --seed 7 --out " + a.string());
  const auto rb = cli("gen" + common + " --seed 7 --threads 2 --out " + b.string());
  const auto rc = cli("gen" + common + " --seed 8 --out " + c.string());
  REQUIRE(ra.status == 0);
  REQUIRE(rb.status == 0);
  REQUIRE(rc.status == 0);
  const auto ha = dataset_file_hash(a / "dataset.jsonl");
  CHECK(ha == dataset_file_hash(b / "dataset.jsonl"));
  CHECK(ha != dataset_file_hash(c / "dataset.jsonl"));
  CHECK(tracebench::testing::read_text(a / "dataset.jsonl") ==
        tracebench::testing::read_text(b / "dataset.jsonl"));
  const auto summary = json::parse(ra.out);
  CHECK(summary["dataset_hash"] == ha);
  CHECK(summary["seed"] == 7);
  CHECK(summary["instances"] == 12);
  CHECK(std::filesystem::exists(a / "dataset.gen.json"));
}

TEST_CASE("prompt reproduces the golden one-shot prompt byte for byte") {
  const auto r = cli("prompt --dataset " + (tracebench::testing::data_dir() / "reference_dataset.jsonl").string() +
                     " --instance reference --shots 1");
  REQUIRE(r.status == 0);
  CHECK(r.out == tracebench::testing::read_text(
                     tracebench::testing::data_dir().parent_path() / "golden" / "reference_prompt.txt"));
}

TEST_CASE("usage errors are structured and show the sub-command contract") {
  const auto r = cli("prompt --dataset " + small_dataset().string());
  CHECK(r.status == 2);
  const auto err = first_json_line(r.err);
  CHECK(err["error"]["command"] == "prompt");
  CHECK(err["error"]["kind"] == "usage");
  CHECK(r.err.find("--instance") != std::string::npos);
  CHECK(cli("frobnicate").status == 2);
  CHECK(cli("prompt --dataset " + small_dataset().string() + " --instance x --variation nope").status == 2);
}

TEST_CASE("inspect reports bins and instances") {
  const auto r = cli("inspect --dataset " + small_dataset().string());
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["instances"] == 8);
  CHECK(j["seed"] == 5);
  CHECK(j["bins"].size() == 4);
  const auto bad = cli("inspect --dataset " + small_dataset().string() + " --instance zzz");
  CHECK(bad.status == 1);
  CHECK(first_json_line(bad.err)["error"]["kind"] == "not_found");
}

TEST_CASE("run, grade and report against the mock server") {
  MockOptions mo;
  mo.think = true;
  MockServer server(mo);
  server.start();
  const auto run_dir = work_dir() / "run";
  const auto before = dataset_file_hash(small_dataset());
  const std::string base = "run --dataset " + small_dataset().string() + " --config " +
                           std::string(TRACEBENCH_CONFIGS_DIR) + "/run_mock.json --base-url " +
                           server.base_url() + " --voters 5 --out " + run_dir.string();

  auto r = cli(base + " --max-new-records 12");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["requested"] == 12);

  const auto gap = cli("grade --run " + run_dir.string());
  CHECK(gap.status != 0);
  CHECK(gap.err.find("missing response for instance") != std::string::npos);
  CHECK(cli("report --run " + run_dir.string()).status == 1);

  r = cli(base);
  REQUIRE(r.status == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary["requested"] == 28);
  CHECK(summary["complete"] == true);
  CHECK(server.requests() == 40);
  server.stop();

  const auto g = cli("grade --run " + run_dir.string());
  REQUIRE(g.status == 0);
  CHECK(g.out.find("| overall | 8 |") != std::string::npos);
  CHECK(g.out.find("| 100.0 | 100.0 | 100.0 |") != std::string::npos);

  const auto rep = cli("report --run " + run_dir.string());
  REQUIRE(rep.status == 0);
  CHECK(std::filesystem::exists(run_dir / "report" / "overview.csv"));
  const auto voters_csv = tracebench::testing::read_text(run_dir / "report" / "by_voters.csv");
  CHECK(voters_csv.find("overall,5,100.0000,100.0000") != std::string::npos);
  CHECK(dataset_file_hash(small_dataset()) == before);
}

TEST_CASE("oracle-check speaks the verdict protocol") {
  const auto ds = small_dataset().string();
  const auto ok = cli("oracle-check --dataset " + ds + " --samples 5 --pool-exemplars 2 " + oracle_cmd());
  REQUIRE(ok.status == 0);
  auto j = json::parse(ok.out);
  CHECK(j["samples"] == 5);
  CHECK(j["exemplars_checked"] == 15);
  CHECK(j["match_rate"] == 1.0);

  const auto all = cli("oracle-check --dataset " + ds + " --samples 1000 " + oracle_cmd() +
                       " --out " + (work_dir() / "verdicts.jsonl").string());
  REQUIRE(all.status == 0);
  CHECK(json::parse(all.out)["samples"] == 8);
  CHECK(tracebench::testing::read_lines(work_dir() / "verdicts.jsonl").size() == 8);

  const auto none = cli("oracle-check --dataset " + ds + " --samples 0 " + oracle_cmd());
  REQUIRE(none.status == 0);
  CHECK(json::parse(none.out)["samples"] == 0);

  const auto bad = cli("oracle-check --dataset " + ds + " --samples 3 " + oracle_cmd(),
                       "FAKE_ORACLE_MODE=mismatch");
  CHECK(bad.status == 1);
  j = json::parse(bad.out);
  REQUIRE(j["divergences"].size() == 1);
  CHECK(j["divergences"][0]["step"] == 2);
  CHECK(j["divergences"][0]["kind"] == "test");
  CHECK(first_json_line(bad.err)["error"]["kind"] == "oracle_mismatch");

  for (const char* mode : {"garbage", "crash", "short"}) {
    CAPTURE(mode);
    const auto r = cli("oracle-check --dataset " + ds + " --samples 3 " + oracle_cmd(),
                       std::string("FAKE_ORACLE_MODE=") + mode);
    CHECK(r.status == 1);
    CHECK(first_json_line(r.err)["error"]["kind"] == "oracle_protocol");
  }
}

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

#include <sstream>

#include "tracebench/oracle_client.hpp"

using namespace tracebench;

namespace {

OracleReport parse(const std::string& text) {
  std::istringstream in(text);
  return parse_oracle_stream(in);
}

const char* kMatch =
    R"({"type":"verdict","instance_id":"a","exemplars":[{"kind":"test","index":0,"match":true,"divergence":null,"error":null}]})";
const char* kMismatch =
    R"({"type":"verdict","instance_id":"b","exemplars":[{"kind":"test","index":0,"match":true},{"kind":"pool","index":3,"match":false,"divergence":{"step":4,"oracle":null,"interpreter":"L7,"}}]})";

}  // namespace

TEST_CASE("well-formed stream parses with consistent summary") {
  const auto r = parse(std::string(kMatch) + "\n" + kMismatch + "\n" +
                       R"({"type":"summary","samples":2,"exemplars_checked":3,"matched":2,"match_rate":0.6666666666666666})" "\n");
  REQUIRE(r.verdicts.size() == 2);
  CHECK(r.verdicts[0].match());
  CHECK_FALSE(r.verdicts[1].match());
  const auto& e = r.verdicts[1].exemplars[1];
  CHECK(e.kind == "pool");
  CHECK(e.index == 3);
  REQUIRE(e.divergence);
  CHECK(e.divergence->step == 4);
  CHECK_FALSE(e.divergence->oracle);
  CHECK(e.divergence->interpreter == "L7,");
  CHECK(oracle_verdict_from_json(to_json(r.verdicts[1])).exemplars[1].divergence->step == 4);
}

TEST_CASE("empty sample set") {
  const auto r = parse(R"({"type":"summary","samples":0,"exemplars_checked":0,"matched":0,"match_rate":1.0})");
  CHECK(r.verdicts.empty());
}

TEST_CASE("protocol violations are rejected") {
  const std::string summary1 =
      R"({"type":"summary","samples":1,"exemplars_checked":1,"matched":1,"match_rate":1.0})";
  CHECK_THROWS_AS(parse(kMatch), OracleProtocolError);
  CHECK_THROWS_AS(parse("nope\n" + summary1), OracleProtocolError);
  CHECK_THROWS_AS(parse(std::string(kMatch) + "\n" +
                        R"({"type":"summary","samples":1,"exemplars_checked":1,"matched":0,"match_rate":0.0})"),
                  OracleProtocolError);
  CHECK_THROWS_AS(parse(summary1 + "\n" + kMatch), OracleProtocolError);
  CHECK_THROWS_AS(parse(R"({"type":"verdict","instance_id":"a","exemplars":[{"kind":"test","index":0,"match":true,"divergence":{"step":1}}]})"
                        "\n" + summary1),
                  OracleProtocolError);
  CHECK_THROWS_AS(parse(R"({"type":"verdict","instance_id":"a","exemplars":[{"kind":"test","index":0,"match":false}]})"
                        "\n" + summary1),
                  OracleProtocolError);
  CHECK_THROWS_AS(parse(R"({"type":"other"})"), OracleProtocolError);
  try {
    parse(std::string(kMatch) + "\n{bad");
    FAIL("expected an error");
  } catch (const OracleProtocolError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("command line quotes the dataset path") {
  OracleRequest r;
  r.dataset = "/tmp/it's here.jsonl";
  r.samples = 10;
  r.pool_exemplars = 1;
  r.seed = 4;
  CHECK(oracle_command_line(r) ==
        "python3 -m py_oracle diff --dataset '/tmp/it'\\''s here.jsonl' --samples 10 "
        "--pool-exemplars 1 --seed 4");
}

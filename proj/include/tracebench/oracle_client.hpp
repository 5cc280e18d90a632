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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tracebench {

// Client side of the differential-oracle subprocess protocol described in
// docs/oracle_protocol.md.

struct Divergence {
  int step = 0;  // 0-based index of the first differing trace line
  std::optional<std::string> oracle;       // absent when the oracle trace ended first
  std::optional<std::string> interpreter;  // absent when the stored trace ended first
};

struct ExemplarVerdict {
  std::string kind;  // "test" or "pool"
  int index = 0;     // pool index; 0 for the test exemplar
  bool match = false;
  std::optional<Divergence> divergence;
  std::optional<std::string> error;  // oracle-side runtime failure
};

struct OracleVerdict {
  std::string instance_id;
  std::vector<ExemplarVerdict> exemplars;
  bool match() const;
};

struct OracleSummary {
  std::size_t samples = 0;
  std::size_t exemplars_checked = 0;
  std::size_t matched = 0;
  double match_rate = 0.0;
};

struct OracleReport {
  std::vector<OracleVerdict> verdicts;
  OracleSummary summary;
};

class OracleProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

OracleVerdict oracle_verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OracleVerdict& v);

// Parses a complete verdict stream and cross-checks it: every record well
// formed, match implies no divergence, and the summary agrees with the
// verdicts. Throws OracleProtocolError naming the offending line.
OracleReport parse_oracle_stream(std::istream& in);

struct OracleRequest {
  std::string command = "python3 -m py_oracle";  // shell command prefix
  std::filesystem::path dataset;
  std::size_t samples = 1000;
  int pool_exemplars = 2;
  std::uint64_t seed = 0;
};

// Command line passed to the shell (arguments single-quoted).
std::string oracle_command_line(const OracleRequest& request);

// Spawns the oracle, parses its stdout and checks that the verdicts name
// distinct dataset instances. Throws OracleProtocolError on a nonzero exit
// or a malformed stream.
OracleReport run_oracle(const OracleRequest& request, std::size_t dataset_size,
                        const std::vector<std::string>& dataset_ids);

}  // namespace tracebench

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

#include "tracebench/oracle_client.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace tracebench {

using nlohmann::json;

bool OracleVerdict::match() const {
  return !exemplars.empty() &&
         std::all_of(exemplars.begin(), exemplars.end(), [](const auto& e) { return e.match; });
}

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

OracleVerdict oracle_verdict_from_json(const json& j) {
  OracleVerdict v;
  v.instance_id = j.at("instance_id").get<std::string>();
  for (const auto& e : j.at("exemplars")) {
    ExemplarVerdict ev;
    ev.kind = e.at("kind").get<std::string>();
    if (ev.kind != "test" && ev.kind != "pool") {
      throw std::invalid_argument("exemplar kind must be test or pool");
    }
    ev.index = e.at("index").get<int>();
    ev.match = e.at("match").get<bool>();
    if (e.contains("divergence") && !e.at("divergence").is_null()) {
      const auto& d = e.at("divergence");
      ev.divergence = Divergence{d.at("step").get<int>(), opt_string(d, "oracle"),
                                 opt_string(d, "interpreter")};
    }
    ev.error = opt_string(e, "error");
    if (ev.match && (ev.divergence || ev.error)) {
      throw std::invalid_argument("a matching exemplar cannot carry a divergence or error");
    }
    if (!ev.match && !ev.divergence && !ev.error) {
      throw std::invalid_argument("a mismatching exemplar needs a divergence or error");
    }
    v.exemplars.push_back(std::move(ev));
  }
  return v;
}

json to_json(const OracleVerdict& v) {
  json exemplars = json::array();
  for (const auto& e : v.exemplars) {
    json d = nullptr;
    if (e.divergence) {
      d = {{"step", e.divergence->step},
           {"oracle", e.divergence->oracle ? json(*e.divergence->oracle) : json(nullptr)},
           {"interpreter",
            e.divergence->interpreter ? json(*e.divergence->interpreter) : json(nullptr)}};
    }
    exemplars.push_back({{"kind", e.kind},
                         {"index", e.index},
                         {"match", e.match},
                         {"divergence", d},
                         {"error", e.error ? json(*e.error) : json(nullptr)}});
  }
  return {{"type", "verdict"}, {"instance_id", v.instance_id}, {"exemplars", exemplars}};
}

OracleReport parse_oracle_stream(std::istream& in) {
  OracleReport report;
  bool have_summary = false;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw OracleProtocolError("oracle output line " + std::to_string(lineno) + ": " + why);
    };
    if (have_summary) fail("record after the summary");
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    const auto type = j.value("type", std::string());
    try {
      if (type == "verdict") {
        report.verdicts.push_back(oracle_verdict_from_json(j));
      } else if (type == "summary") {
        report.summary.samples = j.at("samples").get<std::size_t>();
        report.summary.exemplars_checked = j.at("exemplars_checked").get<std::size_t>();
        report.summary.matched = j.at("matched").get<std::size_t>();
        report.summary.match_rate = j.at("match_rate").get<double>();
        have_summary = true;
      } else {
        fail("unknown record type '" + type + "'");
      }
    } catch (const OracleProtocolError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!have_summary) throw OracleProtocolError("oracle output ended without a summary record");

  std::size_t checked = 0, matched = 0;
  for (const auto& v : report.verdicts) {
    checked += v.exemplars.size();
    for (const auto& e : v.exemplars) matched += e.match ? 1 : 0;
  }
  const auto& s = report.summary;
  const double rate = checked ? static_cast<double>(matched) / static_cast<double>(checked) : 1.0;
  if (s.samples != report.verdicts.size() || s.exemplars_checked != checked ||
      s.matched != matched || std::abs(s.match_rate - rate) > 1e-9) {
    throw OracleProtocolError("oracle summary disagrees with its verdicts");
  }
  return report;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::string oracle_command_line(const OracleRequest& r) {
  std::ostringstream cmd;
  cmd << r.command << " diff --dataset " << shell_quote(r.dataset.string()) << " --samples "
      << r.samples << " --pool-exemplars " << r.pool_exemplars << " --seed " << r.seed;
  return cmd.str();
}

OracleReport run_oracle(const OracleRequest& request, std::size_t dataset_size,
                        const std::vector<std::string>& dataset_ids) {
  const auto cmd = oracle_command_line(request);
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw OracleProtocolError("cannot start oracle: " + cmd);
  std::string output;
  char buf[65536];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) output.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    throw OracleProtocolError("oracle command failed with exit status " + std::to_string(code) +
                              ": " + cmd);
  }
  std::istringstream in(output);
  auto report = parse_oracle_stream(in);

  const std::set<std::string> known(dataset_ids.begin(), dataset_ids.end());
  std::set<std::string> seen;
  for (const auto& v : report.verdicts) {
    if (!known.count(v.instance_id)) {
      throw OracleProtocolError("oracle reported unknown instance " + v.instance_id);
    }
    if (!seen.insert(v.instance_id).second) {
      throw OracleProtocolError("oracle reported instance " + v.instance_id + " twice");
    }
  }
  const auto expected = std::min(request.samples, dataset_size);
  if (report.verdicts.size() != expected) {
    throw OracleProtocolError("oracle returned " + std::to_string(report.verdicts.size()) +
                              " verdicts, expected " + std::to_string(expected));
  }
  return report;
}

}  // namespace tracebench

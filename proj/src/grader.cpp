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

#include "tracebench/grader.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace tracebench {

using nlohmann::json;

namespace {

constexpr std::string_view kOpen = "<think>";
constexpr std::string_view kClose = "</think>";

void count_thought(std::string_view content, ThoughtStats& stats) {
  ++stats.blocks;
  stats.chars += content.size();
  bool in_chunk = false;
  for (char c : content) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_chunk) ++stats.chunks;
    in_chunk = !space;
  }
}

std::string strip_think(std::string_view raw, ThoughtStats& stats) {
  std::string out;
  std::size_t pos = 0;
  const auto first_open = raw.find(kOpen);
  const auto first_close = raw.find(kClose);
  if (first_close != std::string_view::npos &&
      (first_open == std::string_view::npos || first_close < first_open)) {
    count_thought(raw.substr(0, first_close), stats);
    pos = first_close + kClose.size();
  }
  while (pos < raw.size()) {
    const auto open = raw.find(kOpen, pos);
    if (open == std::string_view::npos) {
      out.append(raw.substr(pos));
      break;
    }
    out.append(raw.substr(pos, open - pos));
    const auto body = open + kOpen.size();
    const auto close = raw.find(kClose, body);
    if (close == std::string_view::npos) {
      count_thought(raw.substr(body), stats);
      break;
    }
    count_thought(raw.substr(body, close - body), stats);
    pos = close + kClose.size();
  }
  return out;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

CanonicalResponse canonicalize(std::string_view raw) {
  CanonicalResponse out;
  out.raw_length = raw.size();
  const std::string text = strip_think(raw, out.thought);
  out.had_think = out.thought.blocks > 0;

  std::size_t anchor = text.find("L2,");
  while (anchor != std::string::npos && anchor > 0 && ident_char(text[anchor - 1])) {
    anchor = text.find("L2,", anchor + 1);
  }
  if (anchor == std::string::npos) return out;
  out.anchored = true;

  std::string_view rest(text);
  rest.remove_prefix(anchor);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const auto line = trim(rest.substr(0, nl));
    rest.remove_prefix(nl == std::string_view::npos ? rest.size() : nl + 1);
    if (line.empty() || line.substr(0, 3) == "```") continue;
    if (!parse_step(line)) break;
    out.steps.emplace_back(line);
  }
  return out;
}

std::string canonical_text(const CanonicalResponse& response) {
  std::string out;
  for (const auto& s : response.steps) {
    if (!out.empty()) out += '\n';
    out += s;
  }
  return out;
}

VoterResult grade_lines(std::span<const std::string> steps, std::span<const std::string> gold,
                        int voter) {
  if (gold.empty()) throw std::invalid_argument("gold trace is empty");
  const auto limit = std::min(steps.size(), gold.size());
  std::size_t prefix = 0;
  while (prefix < limit && steps[prefix] == gold[prefix]) ++prefix;
  VoterResult r;
  r.voter = voter;
  r.steps_to_error = static_cast<int>(prefix);
  r.whole_correct = prefix == gold.size() && steps.size() == gold.size();
  return r;
}

VoterResult grade_one(std::span<const std::string> steps, const Trace& gold, int voter) {
  const auto lines = trace_lines(gold);
  return grade_lines(steps, lines, voter);
}

MajorityResult majority_vote(std::span<const std::vector<std::string>> responses) {
  if (responses.empty()) throw std::invalid_argument("majority vote needs at least one response");
  // Candidates keep first-occurrence order, so a stable max picks the tie-break winner.
  std::map<std::vector<std::string>, std::size_t> slot;
  std::vector<MajorityResult> candidates;
  for (std::size_t v = 0; v < responses.size(); ++v) {
    auto [it, inserted] = slot.emplace(responses[v], candidates.size());
    if (inserted) candidates.push_back({responses[v], 0, static_cast<int>(v)});
    ++candidates[it->second].count;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].count > candidates[best].count) best = i;
  }
  return candidates[best];
}

double pass_at_k(int n, int c, int k) {
  if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
    throw std::domain_error("pass@k needs 0 <= c <= n and 1 <= k <= n (got n=" +
                            std::to_string(n) + ", c=" + std::to_string(c) +
                            ", k=" + std::to_string(k) + ")");
  }
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (int j = n - c + 1; j <= n; ++j) miss *= 1.0 - static_cast<double>(k) / j;
  return 1.0 - miss;
}

std::vector<int> default_ks(int n) {
  std::vector<int> ks;
  for (int k : {1, 5, 15, 31}) {
    if (k <= n) ks.push_back(k);
  }
  for (int k = 64; k <= n; k *= 2) ks.push_back(k);
  if (n >= 1 && (ks.empty() || ks.back() != n)) ks.push_back(n);
  return ks;
}

InstanceGrade grade_instance(const std::string& id, const std::string& bin, const Trace& gold,
                             std::span<const std::string> responses) {
  if (responses.empty()) throw std::invalid_argument("instance " + id + " has no responses");
  InstanceGrade g;
  g.id = id;
  g.bin = bin;
  g.gold_steps = static_cast<int>(gold.size());
  const auto gold_lines = trace_lines(gold);

  std::vector<std::vector<std::string>> canon;
  canon.reserve(responses.size());
  for (std::size_t v = 0; v < responses.size(); ++v) {
    auto c = canonicalize(responses[v]);
    g.voters.push_back(grade_lines(c.steps, gold_lines, static_cast<int>(v)));
    g.thoughts.push_back(c.thought);
    if (g.voters.back().whole_correct) ++g.n_correct;
    canon.push_back(std::move(c.steps));
  }
  g.majority = majority_vote(canon);
  g.majority_result = grade_lines(g.majority.steps, gold_lines, g.majority.first_voter);

  const int n = static_cast<int>(responses.size());
  for (int k : default_ks(n)) {
    g.pass_at[k] = pass_at_k(n, g.n_correct, k);
    const auto maj = majority_vote(std::span(canon).first(static_cast<std::size_t>(k)));
    const auto r = grade_lines(maj.steps, gold_lines);
    g.maj_correct[k] = r.whole_correct;
    g.maj_steps[k] = r.steps_to_error;
  }
  return g;
}

namespace {

struct Accum {
  int count = 0;
  double gold = 0, acc = 0, steps = 0, maj_acc = 0, maj_steps = 0, chars = 0, chunks = 0;
  std::map<int, double> pass_at, maj_at;

  void add(const InstanceGrade& g) {
    const double n = static_cast<double>(g.voters.size());
    ++count;
    gold += g.gold_steps;
    acc += 100.0 * g.n_correct / n;
    double s = 0;
    for (const auto& v : g.voters) s += v.steps_to_error;
    steps += s / n;
    maj_acc += g.majority_result.whole_correct ? 100.0 : 0.0;
    maj_steps += g.majority_result.steps_to_error;
    double c = 0, k = 0;
    for (const auto& t : g.thoughts) {
      c += static_cast<double>(t.chars);
      k += static_cast<double>(t.chunks);
    }
    chars += c / n;
    chunks += k / n;
    for (const auto& [kk, p] : g.pass_at) pass_at[kk] += 100.0 * p;
    for (const auto& [kk, ok] : g.maj_correct) maj_at[kk] += ok ? 100.0 : 0.0;
  }

  BinSummary finish(const std::string& label) const {
    BinSummary b;
    b.label = label;
    b.instances = count;
    if (count == 0) return b;
    const double n = count;
    b.gold_steps = gold / n;
    b.single_acc = acc / n;
    b.single_steps = steps / n;
    b.majority_acc = maj_acc / n;
    b.majority_steps = maj_steps / n;
    b.thought_chars = chars / n;
    b.thought_chunks = chunks / n;
    for (const auto& [k, v] : pass_at) b.pass_at[k] = v / n;
    for (const auto& [k, v] : maj_at) b.maj_at[k] = v / n;
    return b;
  }
};

}  // namespace

GradeReport aggregate(std::vector<InstanceGrade> instances, const std::vector<BinSpec>& bins) {
  GradeReport report;
  std::sort(instances.begin(), instances.end(),
            [](const InstanceGrade& a, const InstanceGrade& b) { return a.id < b.id; });
  std::map<std::string, Accum> acc;
  for (const auto& b : bins) acc[b.label];
  for (const auto& g : instances) {
    const int n = static_cast<int>(g.voters.size());
    if (report.voters == 0) report.voters = n;
    if (n != report.voters) {
      throw std::invalid_argument("instance " + g.id + " has " + std::to_string(n) +
                                  " voters, expected " + std::to_string(report.voters));
    }
    auto it = acc.find(g.bin);
    if (it == acc.end()) {
      throw std::invalid_argument("instance " + g.id + " names unknown bin '" + g.bin + "'");
    }
    it->second.add(g);
  }

  int used = 0;
  BinSummary& all = report.overall;
  all.label = "overall";
  for (const auto& spec : bins) {
    auto b = acc[spec.label].finish(spec.label);
    if (b.instances > 0) {
      ++used;
      all.instances += b.instances;
      all.gold_steps += b.gold_steps;
      all.single_acc += b.single_acc;
      all.single_steps += b.single_steps;
      all.majority_acc += b.majority_acc;
      all.majority_steps += b.majority_steps;
      all.thought_chars += b.thought_chars;
      all.thought_chunks += b.thought_chunks;
      for (const auto& [k, v] : b.pass_at) all.pass_at[k] += v;
      for (const auto& [k, v] : b.maj_at) all.maj_at[k] += v;
    }
    report.bins.push_back(std::move(b));
  }
  if (used > 0) {
    const double n = used;
    all.gold_steps /= n;
    all.single_acc /= n;
    all.single_steps /= n;
    all.majority_acc /= n;
    all.majority_steps /= n;
    all.thought_chars /= n;
    all.thought_chunks /= n;
    for (auto& [k, v] : all.pass_at) v /= n;
    for (auto& [k, v] : all.maj_at) v /= n;
  }
  report.instances = std::move(instances);
  return report;
}

namespace {

json keyed(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

json to_json(const InstanceGrade& g) {
  json voters = json::array();
  for (std::size_t i = 0; i < g.voters.size(); ++i) {
    const auto& v = g.voters[i];
    voters.push_back({{"voter", v.voter},
                      {"whole_correct", v.whole_correct},
                      {"steps_to_error", v.steps_to_error},
                      {"thought_chars", g.thoughts[i].chars},
                      {"thought_chunks", g.thoughts[i].chunks}});
  }
  json maj_correct = json::object();
  for (const auto& [k, ok] : g.maj_correct) maj_correct[std::to_string(k)] = ok;
  json maj_steps = json::object();
  for (const auto& [k, s] : g.maj_steps) maj_steps[std::to_string(k)] = s;
  return {{"id", g.id},
          {"bin", g.bin},
          {"gold_steps", g.gold_steps},
          {"n_correct", g.n_correct},
          {"voters", voters},
          {"majority",
           {{"count", g.majority.count},
            {"first_voter", g.majority.first_voter},
            {"whole_correct", g.majority_result.whole_correct},
            {"steps_to_error", g.majority_result.steps_to_error}}},
          {"pass_at", keyed(g.pass_at)},
          {"maj_correct", maj_correct},
          {"maj_steps", maj_steps}};
}

InstanceGrade instance_grade_from_json(const json& j) {
  InstanceGrade g;
  g.id = j.at("id").get<std::string>();
  g.bin = j.at("bin").get<std::string>();
  g.gold_steps = j.at("gold_steps").get<int>();
  g.n_correct = j.at("n_correct").get<int>();
  for (const auto& v : j.at("voters")) {
    g.voters.push_back({v.at("voter").get<int>(), v.at("whole_correct").get<bool>(),
                        v.at("steps_to_error").get<int>()});
    ThoughtStats t;
    t.chars = v.at("thought_chars").get<std::size_t>();
    t.chunks = v.at("thought_chunks").get<std::size_t>();
    g.thoughts.push_back(t);
  }
  const auto& m = j.at("majority");
  g.majority.count = m.at("count").get<int>();
  g.majority.first_voter = m.at("first_voter").get<int>();
  g.majority_result = {g.majority.first_voter, m.at("whole_correct").get<bool>(),
                       m.at("steps_to_error").get<int>()};
  for (auto& [k, v] : j.at("pass_at").items()) g.pass_at[std::stoi(k)] = v.get<double>();
  for (auto& [k, v] : j.at("maj_correct").items()) g.maj_correct[std::stoi(k)] = v.get<bool>();
  for (auto& [k, v] : j.at("maj_steps").items()) g.maj_steps[std::stoi(k)] = v.get<int>();
  return g;
}

json to_json(const BinSummary& b) {
  return {{"label", b.label},
          {"instances", b.instances},
          {"gold_steps", b.gold_steps},
          {"single_acc", b.single_acc},
          {"single_steps", b.single_steps},
          {"majority_acc", b.majority_acc},
          {"majority_steps", b.majority_steps},
          {"pass_at", keyed(b.pass_at)},
          {"maj_at", keyed(b.maj_at)},
          {"thought_chars", b.thought_chars},
          {"thought_chunks", b.thought_chunks}};
}

json to_json(const GradeReport& r) {
  json bins = json::array();
  for (const auto& b : r.bins) bins.push_back(to_json(b));
  return {{"voters", r.voters}, {"bins", bins}, {"overall", to_json(r.overall)}};
}

}  // namespace tracebench

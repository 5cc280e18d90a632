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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tracebench/bench.hpp"
#include "tracebench/trace.hpp"

namespace tracebench {

struct ThoughtStats {
  int blocks = 0;
  std::size_t chars = 0;   // characters between the think tags
  std::size_t chunks = 0;  // whitespace-separated chunks between the think tags
  friend bool operator==(const ThoughtStats&, const ThoughtStats&) = default;
};

struct CanonicalResponse {
  std::vector<std::string> steps;
  bool anchored = false;  // an `L2,` anchor was found outside think spans
  bool had_think = false;
  std::size_t raw_length = 0;
  ThoughtStats thought;
};

// Removes think spans (a leading `</think>` without an opener closes a span
// that started at the beginning of the text; an unclosed `<think>` runs to
// the end), jumps to the first `L2,` that does not continue an identifier,
// then keeps trimmed lines, skipping fence lines and blank lines, up to the
// first line that is not a valid trace step.
CanonicalResponse canonicalize(std::string_view raw);

std::string canonical_text(const CanonicalResponse& response);

struct VoterResult {
  int voter = 0;
  bool whole_correct = false;
  int steps_to_error = 0;  // length of the common prefix with the gold lines
  friend bool operator==(const VoterResult&, const VoterResult&) = default;
};

// Throws std::invalid_argument for an empty gold trace.
VoterResult grade_one(std::span<const std::string> steps, const Trace& gold, int voter = 0);
VoterResult grade_lines(std::span<const std::string> steps, std::span<const std::string> gold,
                        int voter = 0);

struct MajorityResult {
  std::vector<std::string> steps;
  int count = 0;
  int first_voter = 0;  // lowest voter index that produced `steps`
};

// Most frequent step sequence; ties go to the sequence whose first
// occurrence has the lowest voter index. Throws std::invalid_argument on
// empty input.
MajorityResult majority_vote(std::span<const std::vector<std::string>> responses);

// Unbiased pass@k from n samples with c correct. Throws std::domain_error
// unless 0 <= c <= n and 1 <= k <= n.
double pass_at_k(int n, int c, int k);

// {1, 5, 15, 31, 64, 128, ...} up to n, plus n itself.
std::vector<int> default_ks(int n);

struct InstanceGrade {
  std::string id;
  std::string bin;
  int gold_steps = 0;
  std::vector<VoterResult> voters;
  std::vector<ThoughtStats> thoughts;
  MajorityResult majority;
  VoterResult majority_result;
  int n_correct = 0;
  std::map<int, double> pass_at;    // k -> pass@k
  std::map<int, bool> maj_correct;  // k -> majority of voters [0, k) is whole-correct
  std::map<int, int> maj_steps;     // k -> steps-to-error of that majority
};

// Grades one instance from per-voter raw responses (voter i = responses[i]).
InstanceGrade grade_instance(const std::string& id, const std::string& bin, const Trace& gold,
                             std::span<const std::string> responses);

struct BinSummary {
  std::string label;
  int instances = 0;
  double gold_steps = 0;         // mean gold trace length
  double single_acc = 0;         // percent, mean over instances and voters
  double single_steps = 0;       // mean steps-to-error over instances and voters
  double majority_acc = 0;       // percent, majority over all voters
  double majority_steps = 0;
  std::map<int, double> pass_at;  // percent
  std::map<int, double> maj_at;   // percent
  double thought_chars = 0;      // mean per voter response
  double thought_chunks = 0;
};

struct GradeReport {
  int voters = 0;
  std::vector<InstanceGrade> instances;  // sorted by id
  std::vector<BinSummary> bins;          // in bin-spec order, empty bins included
  BinSummary overall;                    // unweighted mean over non-empty bins
};

// Throws std::invalid_argument when instances disagree on the voter count or
// name a bin missing from `bins`.
GradeReport aggregate(std::vector<InstanceGrade> instances, const std::vector<BinSpec>& bins);

nlohmann::json to_json(const InstanceGrade& grade);
// Inverse of to_json(InstanceGrade); the majority step text is not stored.
InstanceGrade instance_grade_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BinSummary& summary);
nlohmann::json to_json(const GradeReport& report);  // summary only, no per-instance records

}  // namespace tracebench

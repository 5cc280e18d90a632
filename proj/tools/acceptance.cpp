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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Each check uses its own oracle rather than reusing the
// unit tests.

#include <CLI11.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "tracebench/audit.hpp"
#include "tracebench/mock_server.hpp"
#include "tracebench/runner.hpp"

using namespace tracebench;

namespace {

struct Paths {
  std::filesystem::path cli = TRACEBENCH_CLI;
  std::filesystem::path data = TRACEBENCH_DATA_DIR;
  std::filesystem::path golden = TRACEBENCH_GOLDEN_DIR;
  std::filesystem::path configs = TRACEBENCH_CONFIGS_DIR;
  std::filesystem::path work;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string trimmed(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int shell(const std::string& cmd, std::string* out = nullptr) {
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string text;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) text.append(buf, n);
  const int status = ::pclose(pipe);
  if (out) *out = std::move(text);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path base_dataset(const Paths& p, int copy) {
  return p.work / ("base_" + std::to_string(copy)) / "dataset.jsonl";
}

// 1. Both reference inputs trace byte-identically to the stored traces.
Outcome reference_traces(const Paths& p) {
  const auto program = parse_program(read_lines(p.data / "reference_program.txt"));
  std::string detail;
  bool ok = true;
  for (int k = 1; k <= 2; ++k) {
    const auto call = trimmed(read_text(p.data / ("reference_call" + std::to_string(k) + ".txt")));
    const auto expected = trimmed(read_text(p.data / ("reference_trace" + std::to_string(k) + ".txt")));
    const auto result = execute(program, parse_call(call, program.params()));
    const auto* trace = std::get_if<Trace>(&result);
    const bool same = trace && trace_to_text(*trace) == expected;
    ok = ok && same;
    detail += (k == 1 ? "" : ", ") + std::string("input ") + std::to_string(k) + ": " +
              (trace ? std::to_string(trace->size()) + " steps" : "error") + (same ? " identical" : " DIFFERENT");
  }
  return {ok, detail};
}

// 2. The CLI renders the one-shot reference prompt byte-exactly.
Outcome golden_prompt(const Paths& p) {
  std::string out;
  const int status = shell(p.cli.string() + " prompt --dataset '" + (p.data / "reference_dataset.jsonl").string() +
                               "' --instance reference --shots 1",
                           &out);
  const auto golden = read_text(p.golden / "reference_prompt.txt");
  const bool same = status == 0 && out == golden;
  return {same, std::to_string(out.size()) + " of " + std::to_string(golden.size()) + " bytes, " +
                    (same ? "identical" : "different")};
}

// 3. Two gen invocations with the same config and seed give identical files.
Outcome determinism(const Paths& p) {
  std::vector<std::string> hashes;
  for (int copy = 0; copy < 2; ++copy) {
    const auto out = base_dataset(p, copy);
    std::filesystem::remove_all(out.parent_path());
    const auto cmd = p.cli.string() + " gen --config '" + (p.configs / "base.json").string() +
                     "' --seed 1 --out '" + out.parent_path().string() + "' > /dev/null";
    if (shell(cmd) != 0) return {false, "gen failed"};
    hashes.push_back(dataset_file_hash(out));
  }
  const bool same = hashes[0] == hashes[1] && read_text(base_dataset(p, 0)) == read_text(base_dataset(p, 1));
  std::filesystem::remove_all(base_dataset(p, 1).parent_path());
  return {same, "hashes " + hashes[0] + " / " + hashes[1] + ", " +
                    std::to_string(std::filesystem::file_size(base_dataset(p, 0))) + " bytes"};
}

// 4. Text-level grammar audit over 10,000 programs.
Outcome audit(const Paths&) {
  GenConfig cfg;
  cfg.seed = 20'240'601;
  Rng rng(cfg.seed);
  const auto limits = AuditLimits::from(cfg);
  std::size_t violations = 0;
  std::string first;
  for (int i = 0; i < 10'000; ++i) {
    const Program prog = generate_program(cfg, rng);
    const auto errors = audit_listing(prog.lines(), limits);
    if (!errors.empty() && violations++ == 0) first = errors.front();
  }
  return {violations == 0,
          "10000 programs, " + std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")")};
}

void collect_loops(const Block& block, int depth, std::vector<std::pair<const While*, int>>& out) {
  for (const auto& s : block) {
    if (const auto* w = std::get_if<While>(&s.node)) {
      out.emplace_back(w, depth);
      collect_loops(w->body, depth + 1, out);
    } else if (const auto* f = std::get_if<If>(&s.node)) {
      collect_loops(f->body, depth + 1, out);
    }
  }
}

// 5. No accepted (program, input) pair reaches the step limit and every
// top-level loop header is evaluated bound/increment + 1 times.
Outcome termination(const Paths& p) {
  std::size_t runs = 0, limit_hits = 0, other_errors = 0, header_mismatch = 0, loops = 0, trace_mismatch = 0;
  scan_dataset(base_dataset(p, 0), {}, [&](TaskInstance&& inst) {
    std::vector<std::pair<const While*, int>> ws;
    collect_loops(inst.program.body(), 0, ws);
    auto check = [&](const Exemplar& e) {
      ++runs;
      const auto result = execute(inst.program, e.args, kDefaultStepLimit);
      if (const auto* err = std::get_if<ExecError>(&result)) {
        (err->kind == ExecErrorKind::StepLimitExceeded ? limit_hits : other_errors)++;
        return;
      }
      const auto& t = std::get<Trace>(result);
      if (!(t == e.trace)) ++trace_mismatch;
      for (const auto& [w, depth] : ws) {
        ++loops;
        const auto hits = std::count_if(t.steps.begin(), t.steps.end(),
                                        [&](const TraceStep& s) { return s.line == w->lines.header; });
        const auto expected = w->bound / w->increment + 1;
        const bool ok = depth == 0 ? hits == expected : hits % expected == 0;
        if (!ok) ++header_mismatch;
      }
    };
    check(inst.test);
    for (const auto& e : inst.pool) check(e);
  });
  const bool pass = runs > 0 && limit_hits == 0 && other_errors == 0 && header_mismatch == 0 && trace_mismatch == 0;
  return {pass, std::to_string(runs) + " executions, " + std::to_string(limit_hits) + " step-limit hits, " +
                    std::to_string(other_errors) + " errors, " + std::to_string(loops) + " loop runs with " +
                    std::to_string(header_mismatch) + " header-count mismatches, " +
                    std::to_string(trace_mismatch) + " stored-trace mismatches"};
}

// 6. Per-bin and overall mean gold-trace length within 25% of the targets.
Outcome calibration(const Paths& p) {
  const std::map<std::string, double> target{{"short", 13}, {"medium", 80}, {"long", 164}, {"xlong", 246}};
  std::map<std::string, std::pair<double, int>> acc;
  scan_dataset(base_dataset(p, 0), {}, [&](TaskInstance&& inst) {
    auto& [sum, n] = acc[inst.bin];
    sum += static_cast<double>(inst.test.trace.size());
    ++n;
  });
  bool ok = acc.size() == target.size();
  std::string detail;
  double overall = 0;
  for (const auto& [label, want] : target) {
    const auto it = acc.find(label);
    const double mean = it == acc.end() || it->second.second == 0 ? 0 : it->second.first / it->second.second;
    overall += mean / static_cast<double>(target.size());
    ok = ok && std::abs(mean - want) <= 0.25 * want;
    detail += label + " " + fmt(mean, 1) + " (" + fmt(want, 0) + "), ";
  }
  ok = ok && std::abs(overall - 125.8) <= 0.25 * 125.8;
  return {ok, detail + "overall " + fmt(overall, 1) + " (125.8)"};
}

// 7. pass@k against brute-force enumeration of k-subsets.
Outcome pass_at_k_check(const Paths&) {
  double worst = 0;
  std::size_t cases = 0;
  for (int n = 1; n <= 8; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        // Voters [0, c) are correct; count k-subsets that contain one.
        std::vector<bool> pick(static_cast<std::size_t>(n), false);
        std::fill(pick.begin(), pick.begin() + k, true);
        double hit = 0, total = 0;
        do {
          bool any = false;
          for (int v = 0; v < c; ++v) any = any || pick[static_cast<std::size_t>(v)];
          hit += any;
          total += 1;
        } while (std::prev_permutation(pick.begin(), pick.end()));
        worst = std::max(worst, std::abs(pass_at_k(n, c, k) - hit / total));
        ++cases;
      }
    }
  }
  const double a = pass_at_k(31, 1, 31), b = pass_at_k(4, 2, 2);
  const bool ok = worst <= 1e-12 && a == 1.0 && std::abs(b - 5.0 / 6.0) <= 1e-12;
  return {ok, std::to_string(cases) + " cases, max |diff| " + fmt(worst * 1e15, 3) + "e-15, pass@(31,1,31)=" +
                  fmt(a, 6) + ", pass@(4,2,2)=" + fmt(b, 6)};
}

std::vector<Trace> gold_traces(std::size_t count, std::uint64_t seed) {
  GenConfig cfg;
  Rng rng(seed);
  std::vector<Trace> out;
  while (out.size() < count) {
    const Program prog = generate_program(cfg, rng);
    auto r = execute(prog, sample_inputs(prog, cfg, rng));
    if (auto* t = std::get_if<Trace>(&r)) out.push_back(std::move(*t));
  }
  return out;
}

// 8. Mutation at step j gives steps_to_error j-1 and a wrong verdict.
Outcome mutation(const Paths&) {
  const auto golds = gold_traces(1500, 8080);
  Rng rng(31);
  std::size_t cases = 0, wrong = 0, clean_wrong = 0;
  for (const auto& gold : golds) {
    const auto lines = trace_lines(gold);
    const auto j = static_cast<std::size_t>(rng.uniform(1, static_cast<std::int64_t>(lines.size())));
    auto changed = [&](const std::string& line) {
      auto step = *parse_step(line);
      step.line += static_cast<int>(rng.uniform(1, 5));
      return render_step(step);
    };
    auto resp = lines;
    int kind = static_cast<int>(rng.uniform(0, 2));
    if (kind == 1 && j < lines.size() && lines[j] == lines[j - 1]) kind = 0;
    if (kind == 0) resp[j - 1] = changed(lines[j - 1]);
    if (kind == 1) resp.erase(resp.begin() + static_cast<std::ptrdiff_t>(j - 1));
    if (kind == 2) resp.insert(resp.begin() + static_cast<std::ptrdiff_t>(j - 1), changed(lines[j - 1]));
    const auto r = grade_one(resp, gold);
    ++cases;
    if (r.steps_to_error != static_cast<int>(j - 1) || r.whole_correct) ++wrong;
    const auto clean = grade_one(lines, gold);
    if (!clean.whole_correct || clean.steps_to_error != static_cast<int>(lines.size())) ++clean_wrong;
  }
  return {cases >= 1000 && wrong == 0 && clean_wrong == 0,
          std::to_string(cases) + " mutated cases, " + std::to_string(wrong) + " misgraded; " +
              std::to_string(clean_wrong) + " unmutated misgraded"};
}

// 9. Majority vote: strict majorities win, order only matters through the
// first-occurrence tie-break, 31 identical votes count 31.
Outcome majority(const Paths&) {
  Rng rng(909);
  std::size_t trials = 0, failures = 0;
  for (int t = 0; t < 2000; ++t) {
    const int n = static_cast<int>(rng.uniform(1, 31));
    const int distinct = static_cast<int>(rng.uniform(1, 5));
    std::vector<std::vector<std::string>> votes;
    for (int v = 0; v < n; ++v) {
      votes.push_back({"L2,", "L3,x:" + std::to_string(rng.uniform(0, distinct - 1))});
    }
    std::map<std::vector<std::string>, int> counts;
    for (const auto& v : votes) ++counts[v];
    int best = 0;
    for (const auto& [seq, c] : counts) best = std::max(best, c);
    auto expected_winner = [&](const std::vector<std::vector<std::string>>& order) {
      for (const auto& v : order) {
        if (counts[v] == best) return v;
      }
      return order.front();
    };
    const auto m = majority_vote(votes);
    bool ok = m.count == best && m.steps == expected_winner(votes);
    auto shuffled = votes;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
    }
    const auto ms = majority_vote(shuffled);
    ok = ok && ms.count == best && ms.steps == expected_winner(shuffled);
    if (2 * best > n) ok = ok && ms.steps == m.steps;
    ++trials;
    failures += !ok;
  }
  const std::vector<std::vector<std::string>> same(31, {"L2,", "L4,y:7"});
  const auto m31 = majority_vote(same);
  const bool ok31 = m31.count == 31 && m31.steps == same.front();
  return {failures == 0 && ok31, std::to_string(trials) + " random electorates, " + std::to_string(failures) +
                                     " failures; 31 identical -> count " + std::to_string(m31.count)};
}

// 10. run -> grade -> report against the HTTP mock gives a perfect,
// per-bin overview table.
Outcome end_to_end(const Paths& p) {
  const auto dir = p.work / "e2e";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  SplitConfig split;
  split.gen.seed = 4;
  split.build.pool_size = 8;
  for (auto& b : split.bins) b.target_count = 5;
  const auto dataset = dir / "dataset.jsonl";
  write_split(split, dataset);

  MockOptions mo;
  mo.think = true;
  mo.fences = true;
  MockServer server(mo);
  server.start();
  RunConfig cfg;
  cfg.endpoint.base_url = server.base_url();
  cfg.endpoint.api_key_env.clear();
  cfg.voters = 7;
  cfg.parallelism = 4;
  RunOptions options;
  options.dataset = dataset;
  options.out_dir = dir / "run";
  HttpChatClient client(cfg.endpoint);
  const auto s = run_eval(cfg, options, client);
  server.stop();
  const auto report = grade_run(options.out_dir);
  write_grades(report, options.out_dir);
  const auto files = write_report(read_grades(options.out_dir), options.out_dir);

  bool ok = s.complete && s.failed == 0 && report.instances.size() == 20;
  for (const auto* b : {&report.bins[0], &report.bins[1], &report.bins[2], &report.bins[3], &report.overall}) {
    ok = ok && b->single_acc == 100.0 && b->majority_acc == 100.0 && b->pass_at.at(7) == 100.0 &&
         std::abs(b->single_steps - b->gold_steps) < 1e-9 && std::abs(b->majority_steps - b->gold_steps) < 1e-9;
  }
  const auto table = read_text(options.out_dir / "report" / "overview.md");
  const auto header = table.find("| Split | Instances | Gold steps |");
  const auto rows = static_cast<std::size_t>(std::count(table.begin(), table.end(), '\n'));
  ok = ok && header != std::string::npos && rows == 2 + 2 + 5 && table.find("| overall | 20 |") != std::string::npos;
  return {ok, std::to_string(s.requested) + " requests, acc " + fmt(report.overall.single_acc, 1) + " / maj " +
                  fmt(report.overall.majority_acc, 1) + " / pass@7 " + fmt(report.overall.pass_at.at(7), 1) +
                  ", steps " + fmt(report.overall.single_steps, 2) + " = gold " + fmt(report.overall.gold_steps, 2) +
                  ", " + std::to_string(files.size()) + " report files"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Paths paths;
  paths.work = std::filesystem::temp_directory_path() / "tracebench_acceptance";
  std::vector<int> only;
  app.add_option("--work-dir", paths.work, "Scratch directory");
  app.add_option("--cli", paths.cli, "Path to the tracebench binary");
  app.add_option("--only", only, "Run only these criteria (5 and 6 need 3)");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(paths.work);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome(const Paths&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "reference program traces", 1, reference_traces},
      {2, "prompt golden file", 1, golden_prompt},
      {3, "gen determinism on the base set", 600, determinism},
      {4, "grammar audit over 10,000 programs", 120, audit},
      {5, "termination and loop-header counts on the base set", 120, termination},
      {6, "bin calibration of the base set", 300, calibration},
      {7, "pass@k against brute force", 1, pass_at_k_check},
      {8, "grading mutation oracle", 10, mutation},
      {9, "majority-vote properties", 1, majority},
      {10, "end-to-end mock run", 30, end_to_end},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(paths);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << out.detail << " ("
              << fmt(secs, 2) << " s" << (in_time ? "" : ", over the " + fmt(c.budget_s, 0) + " s budget")
              << ")" << std::endl;
  }
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}

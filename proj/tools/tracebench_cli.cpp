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

// Command-line front end: dataset generation, inspection, prompt rendering,
// evaluation runs, grading, reporting and the differential-oracle check.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "tracebench/config.hpp"
#include "tracebench/mock_server.hpp"
#include "tracebench/oracle_client.hpp"
#include "tracebench/runner.hpp"

using namespace tracebench;
using nlohmann::json;

namespace {

// Failure carrying the error kind reported on stderr.
struct CliError : std::runtime_error {
  CliError(std::string k, const std::string& message)
      : std::runtime_error(message), kind(std::move(k)) {}
  std::string kind;
};

void print_error(const std::string& command, const std::string& kind, const std::string& message) {
  json err{{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
}

std::filesystem::path dataset_file_in(const std::filesystem::path& out) {
  return out.extension() == ".jsonl" ? out : out / "dataset.jsonl";
}

// Instances for which `keep` returns true, in file order.
std::vector<TaskInstance> scan_instances(const std::filesystem::path& path, DatasetHeader* header,
                                         const std::function<bool(const TaskInstance&)>& keep) {
  std::vector<TaskInstance> out;
  scan_dataset(
      path, [&](const DatasetHeader& h) { if (header) *header = h; },
      [&](TaskInstance&& inst) {
        if (keep(inst)) out.push_back(std::move(inst));
      });
  return out;
}

struct GenArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
  std::optional<int> per_bin;
  std::optional<int> pool_size;
};

int cmd_gen(const GenArgs& a) {
  SplitConfig cfg = a.config.empty() ? SplitConfig{} : split_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.gen.seed = *a.seed;
  if (a.per_bin) {
    for (auto& b : cfg.bins) b.target_count = *a.per_bin;
  }
  if (a.pool_size) cfg.build.pool_size = *a.pool_size;
  cfg.threads = std::max(1u, a.threads);
  const auto path = dataset_file_in(a.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto n = write_split(cfg, path);
  json summary{{"dataset", path.string()},
               {"instances", n},
               {"seed", cfg.gen.seed},
               {"cfg_hash", config_hash(cfg.gen)},
               {"dataset_hash", dataset_file_hash(path)},
               {"config", split_config_to_json(cfg)}};
  std::ofstream(path.parent_path() / (path.stem().string() + ".gen.json")) << summary.dump(2) << '\n';
  summary.erase("config");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct InspectArgs {
  std::string dataset;
  std::string instance;
  bool as_json = false;
};

int cmd_inspect(const InspectArgs& a) {
  DatasetHeader header;
  if (a.instance.empty()) {
    std::map<std::string, std::pair<std::size_t, double>> per_bin;
    std::size_t total = 0;
    scan_dataset(
        a.dataset, [&](const DatasetHeader& h) { header = h; },
        [&](TaskInstance&& inst) {
          auto& [count, steps] = per_bin[inst.bin];
          ++count;
          steps += inst.n_steps;
          ++total;
        });
    json bins = json::array();
    for (const auto& b : header.bins) {
      const auto [count, steps] = per_bin[b.label];
      bins.push_back({{"label", b.label},
                      {"range", {b.lo, b.hi}},
                      {"instances", count},
                      {"mean_steps", count ? steps / static_cast<double>(count) : 0.0}});
    }
    std::cout << json{{"dataset", a.dataset},
                      {"dataset_hash", dataset_file_hash(a.dataset)},
                      {"schema_version", header.schema_version},
                      {"seed", header.seed},
                      {"cfg_hash", header.cfg_hash},
                      {"pool_size", header.pool_size},
                      {"instances", total},
                      {"bins", bins}}
                     .dump(2)
              << '\n';
    return 0;
  }
  auto found = scan_instances(a.dataset, &header,
                              [&](const TaskInstance& inst) { return inst.id == a.instance; });
  if (found.empty()) throw CliError("not_found", "instance " + a.instance + " is not in the dataset");
  const auto& inst = found.front();
  if (a.as_json) {
    json pool = json::array();
    for (const auto& e : inst.pool) pool.push_back({{"call", e.call_text}, {"trace", trace_lines(e.trace)}});
    std::cout << json{{"id", inst.id},
                      {"bin", inst.bin},
                      {"n_steps", inst.n_steps},
                      {"seed", inst.seed},
                      {"cfg_hash", header.cfg_hash},
                      {"program", inst.program.lines()},
                      {"test", {{"call", inst.test.call_text}, {"trace", trace_lines(inst.test.trace)}}},
                      {"pool", pool}}
                     .dump(2)
              << '\n';
    return 0;
  }
  std::cout << "instance " << inst.id << "  bin " << inst.bin << "  steps " << inst.n_steps
            << "  pool " << inst.pool.size() << "  seed " << inst.seed << "  cfg " << header.cfg_hash
            << "\n\n"
            << render_program(inst.program) << "\n\n"
            << inst.test.call_text << "\n\n"
            << trace_to_text(inst.test.trace) << '\n';
  return 0;
}

struct PromptArgs {
  std::string dataset;
  std::string instance;
  int shots = 4;
  std::string strategy = "pool";
  std::string variation = "default";
  int voter = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool with_meta = false;
};

int cmd_prompt(const PromptArgs& a) {
  const auto variation = variation_from_string(a.variation);
  const ShotStrategy strategy{shot_kind_from_string(a.strategy), a.shots};
  DatasetHeader header;
  auto target = scan_instances(a.dataset, &header,
                               [&](const TaskInstance& inst) { return inst.id == a.instance; });
  if (target.empty()) throw CliError("not_found", "instance " + a.instance + " is not in the dataset");
  std::vector<TaskInstance> same_bin;
  std::vector<const TaskInstance*> siblings;
  if (variation == Variation::AltPrograms) {
    const auto bin = target.front().bin;
    same_bin = scan_instances(a.dataset, nullptr, [&](const TaskInstance& inst) {
      return inst.bin == bin && inst.id != a.instance;
    });
    for (const auto& s : same_bin) siblings.push_back(&s);
  }
  const auto bundle = render_prompt(target.front(), strategy, variation, a.voter, a.seed, siblings);
  if (!a.out.empty()) {
    std::ofstream(a.out, std::ios::binary) << bundle.prompt;
  } else {
    std::cout << bundle.prompt;
  }
  if (a.with_meta) {
    json shots = json::array();
    for (const auto& s : bundle.shots) shots.push_back({s.instance_id, s.exemplar});
    std::cerr << json{{"instance_id", bundle.instance_id},
                      {"voter", bundle.voter},
                      {"seed", a.seed},
                      {"cfg_hash", header.cfg_hash},
                      {"variation", std::string(to_string(variation))},
                      {"shots", shots},
                      {"prompt_tokens", estimate_prompt_tokens(bundle)},
                      {"template_version", kPromptTemplateVersion}}
                     .dump()
              << '\n';
  }
  return 0;
}

struct RunArgs {
  std::string dataset;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> limit;
  std::optional<int> voters;
  std::optional<int> parallelism;
  std::string model;
  std::string base_url;
  std::string think;
  std::optional<std::size_t> max_new_records;
  bool retry_failed = false;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.limit) cfg.limit = *a.limit;
  if (a.voters) cfg.voters = *a.voters;
  if (a.parallelism) cfg.parallelism = *a.parallelism;
  if (!a.model.empty()) cfg.model = a.model;
  if (!a.base_url.empty()) cfg.endpoint.base_url = a.base_url;
  if (a.think == "on") cfg.think_mode = ThinkMode::On;
  if (a.think == "off") cfg.think_mode = ThinkMode::Off;
  cfg.validate();
  RunOptions options;
  options.dataset = a.dataset;
  options.out_dir = a.out;
  options.max_new_records = a.max_new_records;
  options.retry_failed = a.retry_failed;
  HttpChatClient client(cfg.endpoint);
  const auto s = run_eval(cfg, options, client);
  std::cout << json{{"run_id", s.run_id},
                    {"run_dir", a.out},
                    {"seed", cfg.seed},
                    {"dataset_hash", dataset_file_hash(a.dataset)},
                    {"planned", s.planned},
                    {"already_done", s.already_done},
                    {"requested", s.requested},
                    {"failed", s.failed},
                    {"retries", s.retries},
                    {"complete", s.complete}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_grade(const std::string& run_dir, const std::string& dataset) {
  const auto report =
      grade_run(run_dir, dataset.empty() ? std::nullopt : std::optional<std::filesystem::path>(dataset));
  write_grades(report, run_dir);
  std::cout << overview_markdown(report);
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const auto report = read_grades(run_dir);
  for (const auto& f : write_report(report, run_dir)) std::cout << f.string() << '\n';
  return 0;
}

struct OracleArgs {
  std::string dataset;
  std::size_t samples = 1000;
  int pool_exemplars = 2;
  std::uint64_t seed = 0;
  std::string oracle_cmd = "python3 -m py_oracle";
  std::string out;
};

int cmd_oracle(const OracleArgs& a) {
  std::vector<std::string> ids;
  scan_dataset(a.dataset, {}, [&](TaskInstance&& inst) { ids.push_back(inst.id); });
  OracleRequest req;
  req.command = a.oracle_cmd;
  req.dataset = a.dataset;
  req.samples = a.samples;
  req.pool_exemplars = a.pool_exemplars;
  req.seed = a.seed;
  const auto report = run_oracle(req, ids.size(), ids);
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    for (const auto& v : report.verdicts) out << to_json(v).dump() << '\n';
  }
  json divergences = json::array();
  for (const auto& v : report.verdicts) {
    for (const auto& e : v.exemplars) {
      if (e.match) continue;
      json d{{"instance_id", v.instance_id}, {"kind", e.kind}, {"index", e.index}};
      if (e.divergence) {
        d["step"] = e.divergence->step;
        d["oracle"] = e.divergence->oracle ? json(*e.divergence->oracle) : json(nullptr);
        d["interpreter"] = e.divergence->interpreter ? json(*e.divergence->interpreter) : json(nullptr);
      }
      if (e.error) d["error"] = *e.error;
      divergences.push_back(d);
    }
  }
  std::cout << json{{"dataset_hash", dataset_file_hash(a.dataset)},
                    {"seed", a.seed},
                    {"samples", report.summary.samples},
                    {"exemplars_checked", report.summary.exemplars_checked},
                    {"matched", report.summary.matched},
                    {"match_rate", report.summary.match_rate},
                    {"divergences", divergences}}
                   .dump(2)
            << '\n';
  if (!divergences.empty()) {
    throw CliError("oracle_mismatch", std::to_string(divergences.size()) +
                                          " exemplar(s) diverge from the oracle");
  }
  return 0;
}

struct MockArgs {
  std::string host = "127.0.0.1";
  int port = 8000;
  MockOptions options;
  bool no_fences = false;
};

int cmd_mock(MockArgs a) {
  a.options.fences = !a.no_fences;
  MockServer server(a.options);
  std::cerr << json{{"listening", a.host + ":" + std::to_string(a.port)}, {"seed", a.options.seed}}.dump()
            << '\n';
  server.serve_forever(a.host, a.port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic program-execution-trace benchmark toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every sub-command");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a dataset split");
  g->add_option("--config", gen.config, "Split config JSON (defaults when omitted)")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Override gen.seed");
  g->add_option("--out", gen.out, "Output directory (or .jsonl path)")->required();
  g->add_option("--threads", gen.threads, "Worker threads (output does not depend on it)");
  g->add_option("--per-bin", gen.per_bin, "Override every bin's target count")->check(CLI::PositiveNumber);
  g->add_option("--pool-size", gen.pool_size, "Override the exemplar pool size")->check(CLI::PositiveNumber);

  InspectArgs inspect;
  auto* i = app.add_subcommand("inspect", "Summarize a dataset or show one instance");
  i->add_option("--dataset", inspect.dataset)->required()->check(CLI::ExistingFile);
  i->add_option("--instance", inspect.instance, "Instance id");
  i->add_flag("--json", inspect.as_json, "Instance as JSON");

  PromptArgs prompt;
  auto* p = app.add_subcommand("prompt", "Render the prompt for one instance and voter");
  p->add_option("--dataset", prompt.dataset)->required()->check(CLI::ExistingFile);
  p->add_option("--instance", prompt.instance)->required();
  p->add_option("--shots", prompt.shots, "In-context demonstrations")->check(CLI::NonNegativeNumber);
  p->add_option("--strategy", prompt.strategy)->check(CLI::IsMember({"pool", "fixed", "count"}));
  p->add_option("--variation", prompt.variation)
      ->check(CLI::IsMember({"default", "alt-programs", "transduction"}));
  p->add_option("--voter", prompt.voter)->check(CLI::NonNegativeNumber);
  p->add_option("--seed", prompt.seed, "Shot-selection seed");
  p->add_option("--out", prompt.out, "Write the prompt here instead of stdout");
  p->add_flag("--meta", prompt.with_meta, "Print shot choices and provenance to stderr");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Query an endpoint for every (instance, voter) pair");
  r->add_option("--dataset", run.dataset)->required()->check(CLI::ExistingFile);
  r->add_option("--config", run.config, "Run config JSON")->check(CLI::ExistingFile);
  r->add_option("--out", run.out, "Run directory")->required();
  r->add_option("--seed", run.seed, "Shot-selection seed");
  r->add_option("--limit", run.limit, "First N instances");
  r->add_option("--voters", run.voters)->check(CLI::PositiveNumber);
  r->add_option("--parallelism", run.parallelism)->check(CLI::PositiveNumber);
  r->add_option("--model", run.model);
  r->add_option("--base-url", run.base_url);
  r->add_option("--think", run.think)->check(CLI::IsMember({"on", "off"}));
  r->add_option("--max-new-records", run.max_new_records, "Stop after this many new records");
  r->add_flag("--retry-failed", run.retry_failed, "Re-request pairs whose last record failed");

  std::string grade_dir, grade_dataset;
  auto* gr = app.add_subcommand("grade", "Grade a finished run from its stored responses");
  gr->add_option("--run", grade_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  gr->add_option("--dataset", grade_dataset, "Dataset path if it moved")->check(CLI::ExistingFile);

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Write tables and series for a graded run");
  rep->add_option("--run", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle-check", "Compare stored traces with the external oracle");
  o->add_option("--dataset", oracle.dataset)->required()->check(CLI::ExistingFile);
  o->add_option("--samples", oracle.samples, "Instances to check");
  o->add_option("--pool-exemplars", oracle.pool_exemplars, "Pool exemplars per instance")
      ->check(CLI::NonNegativeNumber);
  o->add_option("--seed", oracle.seed, "Sampling seed passed to the oracle");
  o->add_option("--oracle-cmd", oracle.oracle_cmd, "Shell command prefix that starts the oracle");
  o->add_option("--out", oracle.out, "Write verdict records here");

  MockArgs mock;
  auto* m = app.add_subcommand("mock-server", "Serve the offline chat-completions stand-in");
  m->add_option("--host", mock.host);
  m->add_option("--port", mock.port)->check(CLI::Range(1, 65535));
  m->add_flag("--think", mock.options.think, "Prepend a think span");
  m->add_flag("--reasoning-field", mock.options.reasoning_field, "Return the thought separately");
  m->add_flag("--no-fences", mock.no_fences, "Answer without code fences");
  m->add_option("--wrong-rate", mock.options.wrong_rate)->check(CLI::Range(0.0, 1.0));
  m->add_option("--seed", mock.options.seed, "Seed for which replies go wrong");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    const auto* sub = subs.empty() ? static_cast<const CLI::App*>(&app) : subs.front();
    print_error(subs.empty() ? "" : sub->get_name(), "usage", e.what());
    std::cerr << sub->help();
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  const auto name = sub->get_name();
  try {
    if (name == "gen") return cmd_gen(gen);
    if (name == "inspect") return cmd_inspect(inspect);
    if (name == "prompt") return cmd_prompt(prompt);
    if (name == "run") return cmd_run(run);
    if (name == "grade") return cmd_grade(grade_dir, grade_dataset);
    if (name == "report") return cmd_report(report_dir);
    if (name == "oracle-check") return cmd_oracle(oracle);
    if (name == "mock-server") return cmd_mock(mock);
  } catch (const CliError& e) {
    print_error(name, e.kind, e.what());
    return 1;
  } catch (const RunError& e) {
    print_error(name, "run_error", e.what());
    return 1;
  } catch (const DatasetError& e) {
    print_error(name, "dataset_error", e.what());
    return 1;
  } catch (const OracleProtocolError& e) {
    print_error(name, "oracle_protocol", e.what());
    return 1;
  } catch (const PromptError& e) {
    print_error(name, "prompt_error", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    print_error(name, "invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(name, "error", e.what());
    return 1;
  }
  return 0;
}

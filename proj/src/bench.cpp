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

#include "tracebench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tracebench/config.hpp"

namespace tracebench {

using nlohmann::json;

std::vector<BinSpec> default_bins() {
  return {
      {"short", 5, 30, 500, 13.0},
      {"medium", 60, 100, 500, 80.0},
      {"long", 140, 190, 500, 164.0},
      {"xlong", 220, 275, 500, 246.0},
  };
}

void validate_bins(const std::vector<BinSpec>& bins) {
  if (bins.empty()) throw std::invalid_argument("at least one bin is required");
  std::set<std::string> labels;
  for (const auto& b : bins) {
    if (b.label.empty()) throw std::invalid_argument("bin label must not be empty");
    if (!labels.insert(b.label).second) {
      throw std::invalid_argument("duplicate bin label '" + b.label + "'");
    }
    if (b.lo < 1 || b.hi < b.lo) {
      throw std::invalid_argument("bin '" + b.label + "' has an empty step range");
    }
    if (b.target_count < 1) {
      throw std::invalid_argument("bin '" + b.label + "' needs a positive target count");
    }
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    for (std::size_t j = i + 1; j < bins.size(); ++j) {
      if (bins[i].lo <= bins[j].hi && bins[j].lo <= bins[i].hi) {
        throw std::invalid_argument("bins '" + bins[i].label + "' and '" + bins[j].label +
                                    "' overlap");
      }
    }
  }
}

std::optional<std::size_t> assign_bin(int n_steps, const std::vector<BinSpec>& bins) {
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (n_steps >= bins[i].lo && n_steps <= bins[i].hi) return i;
  }
  return std::nullopt;
}

namespace {

// Samples one input and executes it. Returns nullopt (and counts a
// rejection) for execution errors and argument tuples already in `seen`.
std::optional<Exemplar> draw_exemplar(const Program& program, const GenConfig& cfg,
                                      const BuildOptions& options, Rng& rng,
                                      std::set<std::string>& seen) {
  auto args = sample_inputs(program, cfg, rng);
  auto call = render_call(program.params(), args);
  if (seen.count(call)) return std::nullopt;
  auto result = execute(program, args, options.step_limit);
  auto* trace = std::get_if<Trace>(&result);
  if (!trace) return std::nullopt;
  seen.insert(call);
  return Exemplar{std::move(args), std::move(call), std::move(*trace)};
}

}  // namespace

std::optional<TaskInstance> build_instance_for(const Program& program, const GenConfig& cfg,
                                               const BuildOptions& options, Rng& rng,
                                               const std::function<bool(int)>& keep_test) {
  if (options.pool_size < 1) throw std::invalid_argument("pool_size must be at least 1");
  std::set<std::string> seen;
  int rejects = 0;
  auto next = [&]() -> std::optional<Exemplar> {
    while (true) {
      if (auto ex = draw_exemplar(program, cfg, options, rng, seen)) return ex;
      if (++rejects > options.input_retry_budget) return std::nullopt;
    }
  };

  auto test = next();
  if (!test) return std::nullopt;
  const int n_steps = static_cast<int>(test->trace.size());
  if (keep_test && !keep_test(n_steps)) return std::nullopt;

  TaskInstance inst;
  inst.program = program;
  inst.test = std::move(*test);
  inst.n_steps = n_steps;
  inst.seed = program.seed();
  inst.id = hex64(program.seed());
  inst.pool.reserve(static_cast<std::size_t>(options.pool_size));
  while (static_cast<int>(inst.pool.size()) < options.pool_size) {
    auto ex = next();
    if (!ex) return std::nullopt;
    inst.pool.push_back(std::move(*ex));
  }
  return inst;
}

std::optional<TaskInstance> build_instance(const GenConfig& cfg, const BuildOptions& options,
                                           Rng& rng) {
  auto program = generate_program(cfg, rng);
  return build_instance_for(program, cfg, options, rng);
}

namespace {

constexpr std::size_t kSplitBatch = 256;

std::string attempt_id(std::size_t attempt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "i%07zu", attempt);
  return buf;
}

// Runs the attempt loop and hands each kept instance to `pack`; returns the
// packed values grouped by bin order and sorted by id within a bin.
template <typename Pack>
auto fill_bins(const SplitConfig& cfg, Pack pack) {
  using Packed = decltype(pack(std::declval<TaskInstance&&>()));
  cfg.gen.validate();
  validate_bins(cfg.bins);
  const auto hash = config_hash(cfg.gen);
  const auto& bins = cfg.bins;

  std::vector<std::vector<std::pair<std::string, Packed>>> filled(bins.size());
  auto all_full = [&] {
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (static_cast<int>(filled[b].size()) < bins[b].target_count) return false;
    }
    return true;
  };

  std::size_t attempt = 0;
  while (!all_full()) {
    if (attempt >= cfg.max_attempts) {
      std::string msg = "bins not filled after " + std::to_string(cfg.max_attempts) +
                        " attempts:";
      for (std::size_t b = 0; b < bins.size(); ++b) {
        msg += " " + bins[b].label + "=" + std::to_string(filled[b].size()) + "/" +
               std::to_string(bins[b].target_count);
      }
      throw GenerationExhausted(msg);
    }
    // Workers only see the fill state from the start of the batch, so the
    // outcome of every attempt is independent of scheduling.
    std::vector<bool> open(bins.size());
    for (std::size_t b = 0; b < bins.size(); ++b) {
      open[b] = static_cast<int>(filled[b].size()) < bins[b].target_count;
    }
    const std::size_t count = std::min(kSplitBatch, cfg.max_attempts - attempt);
    std::vector<std::optional<std::tuple<std::size_t, std::string, Packed>>> batch(count);
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
      for (std::size_t k; (k = cursor.fetch_add(1)) < count;) {
        const std::size_t index = attempt + k;
        const auto seed = derive_seed(cfg.gen.seed, index);
        Rng rng(seed);
        Program drafted;
        try {
          drafted = generate_program(cfg.gen, rng);
        } catch (const GenerationExhausted&) {
          continue;
        }
        Program program(drafted.params(), drafted.body(), hash, seed);
        auto keep = [&](int n) {
          auto b = assign_bin(n, bins);
          return b && open[*b];
        };
        if (auto inst = build_instance_for(program, cfg.gen, cfg.build, rng, keep)) {
          const auto b = *assign_bin(inst->n_steps, bins);
          inst->id = attempt_id(index);
          inst->bin = bins[b].label;
          auto id = inst->id;
          batch[k].emplace(b, std::move(id), pack(std::move(*inst)));
        }
      }
    };
    const unsigned threads = std::max(1u, cfg.threads);
    if (threads == 1) {
      work();
    } else {
      std::vector<std::thread> workers;
      for (unsigned t = 0; t < threads; ++t) workers.emplace_back(work);
      for (auto& t : workers) t.join();
    }
    for (auto& slot : batch) {
      if (!slot) continue;
      auto& [b, id, packed] = *slot;
      if (static_cast<int>(filled[b].size()) < bins[b].target_count) {
        filled[b].emplace_back(std::move(id), std::move(packed));
      }
    }
    attempt += count;
  }

  std::vector<Packed> out;
  for (auto& group : filled) {
    std::sort(group.begin(), group.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& entry : group) out.push_back(std::move(entry.second));
  }
  return out;
}

}  // namespace

std::vector<TaskInstance> build_split(const SplitConfig& cfg) {
  return fill_bins(cfg, [](TaskInstance&& inst) { return std::move(inst); });
}

std::optional<std::string> verify_instance(const TaskInstance& instance,
                                           std::size_t step_limit) {
  const auto& program = instance.program;
  std::set<std::string> seen;
  auto check = [&](const Exemplar& ex, const std::string& what) -> std::optional<std::string> {
    std::string expected_call;
    try {
      expected_call = render_call(program.params(), ex.args);
    } catch (const std::exception& e) {
      return what + ": " + e.what();
    }
    if (expected_call != ex.call_text) return what + ": call text does not match arguments";
    if (!seen.insert(ex.call_text).second) return what + ": duplicate arguments";
    ExecResult result;
    try {
      result = execute(program, ex.args, step_limit);
    } catch (const std::exception& e) {
      return what + ": " + e.what();
    }
    if (auto* err = std::get_if<ExecError>(&result)) {
      return what + ": execution failed (" + std::string(to_string(err->kind)) + " at L" +
             std::to_string(err->line) + ")";
    }
    const auto& trace = std::get<Trace>(result);
    if (trace != ex.trace) {
      std::size_t i = 0;
      while (i < trace.size() && i < ex.trace.size() && trace.steps[i] == ex.trace.steps[i]) ++i;
      return what + ": stored trace diverges at step " + std::to_string(i + 1);
    }
    return std::nullopt;
  };
  if (auto err = check(instance.test, "test")) return err;
  for (std::size_t i = 0; i < instance.pool.size(); ++i) {
    if (auto err = check(instance.pool[i], "pool[" + std::to_string(i) + "]")) return err;
  }
  if (instance.n_steps != static_cast<int>(instance.test.trace.size())) {
    return std::string("n_steps does not match the test trace length");
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

const TaskInstance* Dataset::find(std::string_view id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

Dataset make_dataset(const SplitConfig& cfg, std::vector<TaskInstance> instances) {
  Dataset ds;
  ds.header.seed = cfg.gen.seed;
  ds.header.gen = cfg.gen;
  ds.header.cfg_hash = config_hash(cfg.gen);
  ds.header.pool_size = cfg.build.pool_size;
  ds.header.bins = cfg.bins;
  ds.instances = std::move(instances);
  return ds;
}

namespace {

json bin_to_json(const BinSpec& b) {
  return {{"label", b.label},
          {"lo", b.lo},
          {"hi", b.hi},
          {"target_count", b.target_count},
          {"target_mean", b.target_mean}};
}

json header_to_json(const DatasetHeader& h) {
  json bins = json::array();
  for (const auto& b : h.bins) bins.push_back(bin_to_json(b));
  return {{"type", "header"},         {"schema_version", h.schema_version},
          {"seed", h.seed},           {"cfg", gen_config_to_json(h.gen)},
          {"cfg_hash", h.cfg_hash},   {"pool_size", h.pool_size},
          {"bins", bins}};
}

json exemplar_to_json(const Exemplar& ex) {
  return {{"call_text", ex.call_text}, {"trace_lines", trace_lines(ex.trace)}};
}

json instance_to_json(const TaskInstance& inst) {
  json params = json::array();
  for (const auto& p : inst.program.params()) {
    params.push_back({{"name", p.name}, {"type", std::string(to_string(p.type))}});
  }
  json pool = json::array();
  for (const auto& ex : inst.pool) pool.push_back(exemplar_to_json(ex));
  return {{"id", inst.id},
          {"bin", inst.bin},
          {"n_steps", inst.n_steps},
          {"seed", inst.seed},
          {"program_seed", inst.program.seed()},
          {"cfg_hash", inst.program.config_hash()},
          {"params", params},
          {"program_lines", inst.program.lines()},
          {"exemplars", pool},
          {"test", exemplar_to_json(inst.test)}};
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << header_to_json(ds.header).dump() << '\n';
  for (const auto& inst : ds.instances) out << instance_to_json(inst).dump() << '\n';
}

const json& field(const json& obj, const char* key, std::size_t record, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw DatasetError(record, std::string(where) + " is missing field '" + key + "'");
  }
  return obj.at(key);
}

DatasetHeader header_from_json(const json& j) {
  const auto& type = field(j, "type", 0, "header");
  if (type != "header") throw DatasetError(0, "first record is not a header");
  DatasetHeader h;
  h.schema_version = field(j, "schema_version", 0, "header").get<int>();
  if (h.schema_version != kDatasetSchemaVersion) {
    throw DatasetError(0, "unsupported schema version " + std::to_string(h.schema_version) +
                              " (expected " + std::to_string(kDatasetSchemaVersion) + ")");
  }
  h.seed = field(j, "seed", 0, "header").get<std::uint64_t>();
  try {
    h.gen = gen_config_from_json(field(j, "cfg", 0, "header"));
  } catch (const std::invalid_argument& e) {
    throw DatasetError(0, e.what());
  }
  h.cfg_hash = field(j, "cfg_hash", 0, "header").get<std::string>();
  h.pool_size = field(j, "pool_size", 0, "header").get<int>();
  for (const auto& b : field(j, "bins", 0, "header")) {
    BinSpec spec;
    spec.label = field(b, "label", 0, "bin").get<std::string>();
    spec.lo = field(b, "lo", 0, "bin").get<int>();
    spec.hi = field(b, "hi", 0, "bin").get<int>();
    spec.target_count = field(b, "target_count", 0, "bin").get<int>();
    spec.target_mean = field(b, "target_mean", 0, "bin").get<double>();
    h.bins.push_back(std::move(spec));
  }
  return h;
}

Exemplar exemplar_from_json(const json& j, const Program& program, std::size_t record,
                            const std::string& where) {
  Exemplar ex;
  ex.call_text = field(j, "call_text", record, where.c_str()).get<std::string>();
  const auto lines =
      field(j, "trace_lines", record, where.c_str()).get<std::vector<std::string>>();
  try {
    ex.args = parse_call(ex.call_text, program.params());
    ex.trace = lines_to_trace(lines);
  } catch (const std::exception& e) {
    throw DatasetError(record, where + ": " + e.what());
  }
  return ex;
}

TaskInstance instance_from_json(const json& j, std::size_t record) {
  const std::string id =
      j.is_object() && j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
  const std::string where = id.empty() ? std::string("instance") : "instance '" + id + "'";
  TaskInstance inst;
  inst.id = field(j, "id", record, where.c_str()).get<std::string>();
  inst.bin = field(j, "bin", record, where.c_str()).get<std::string>();
  inst.n_steps = field(j, "n_steps", record, where.c_str()).get<int>();
  inst.seed = field(j, "seed", record, where.c_str()).get<std::uint64_t>();
  const auto program_seed = field(j, "program_seed", record, where.c_str()).get<std::uint64_t>();
  const auto hash = field(j, "cfg_hash", record, where.c_str()).get<std::string>();
  const auto lines = field(j, "program_lines", record, where.c_str()).get<std::vector<std::string>>();
  try {
    inst.program = parse_program(lines, hash, program_seed);
  } catch (const std::exception& e) {
    throw DatasetError(record, where + ": " + e.what());
  }
  std::vector<Param> params;
  for (const auto& p : field(j, "params", record, where.c_str())) {
    params.push_back({field(p, "name", record, "param").get<std::string>(),
                      value_type_from_string(field(p, "type", record, "param").get<std::string>())});
  }
  if (params != inst.program.params()) {
    throw DatasetError(record, where + ": params do not match the program signature");
  }
  const auto& pool = field(j, "exemplars", record, where.c_str());
  inst.pool.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    inst.pool.push_back(
        exemplar_from_json(pool[i], inst.program, record, where + " exemplar " + std::to_string(i)));
  }
  inst.test = exemplar_from_json(field(j, "test", record, where.c_str()), inst.program, record,
                                 where + " test");
  return inst;
}

template <typename LineSource>
void read_records(LineSource&& next_line,
                  const std::function<void(const DatasetHeader&)>& on_header,
                  const std::function<void(TaskInstance&&)>& on_instance) {
  std::string line;
  std::size_t record = 0;
  bool have_header = false;
  for (; next_line(line); ++record) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(record, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        auto header = header_from_json(j);
        have_header = true;
        if (on_header) on_header(header);
      } else if (on_instance) {
        on_instance(instance_from_json(j, record));
      }
    } catch (const json::exception& e) {
      throw DatasetError(record, std::string("bad field: ") + e.what());
    }
  }
  if (!have_header) throw DatasetError(0, "missing header record");
}

template <typename LineSource>
Dataset read_dataset(LineSource&& next_line) {
  Dataset ds;
  read_records(
      next_line, [&](const DatasetHeader& h) { ds.header = h; },
      [&](TaskInstance&& inst) { ds.instances.push_back(std::move(inst)); });
  return ds;
}

}  // namespace

std::string serialize_dataset(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset(out, dataset);
  return out.str();
}

Dataset parse_dataset(std::string_view text) {
  std::size_t pos = 0;
  return read_dataset([&](std::string& line) {
    if (pos >= text.size()) return false;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line.assign(text.substr(pos, end - pos));
    pos = end + 1;
    return true;
  });
}

std::size_t write_split(const SplitConfig& cfg, const std::filesystem::path& path) {
  auto records = fill_bins(cfg, [](TaskInstance&& inst) { return instance_to_json(inst).dump(); });
  auto header = make_dataset(cfg, {}).header;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header_to_json(header).dump() << '\n';
  for (const auto& r : records) out << r << '\n';
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path.string());
  return records.size();
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dataset(out, dataset);
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset([&](std::string& line) { return static_cast<bool>(std::getline(in, line)); });
}

void scan_dataset(const std::filesystem::path& path,
                  const std::function<void(const DatasetHeader&)>& on_header,
                  const std::function<void(TaskInstance&&)>& on_instance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  read_records([&](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
               on_header, on_instance);
}

std::string dataset_file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return hex64(h);
}

}  // namespace tracebench

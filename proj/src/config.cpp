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

#include "tracebench/config.hpp"

#include <fstream>
#include <set>

namespace tracebench {

using nlohmann::json;

json gen_config_to_json(const GenConfig& cfg) {
  json kinds = json::array();
  for (auto k : cfg.allowed_stmt_kinds) kinds.push_back(std::string(to_string(k)));
  auto range = [](std::pair<int, int> r) { return json::array({r.first, r.second}); };
  return json{
      {"seed", cfg.seed},
      {"max_loc", cfg.max_loc},
      {"max_scope_depth", cfg.max_scope_depth},
      {"max_expansion_depth", cfg.max_expansion_depth},
      {"int_cap", cfg.int_cap},
      {"literal_cap", cfg.literal_cap},
      {"element_cap", cfg.element_cap},
      {"list_len_range", range(cfg.list_len_range)},
      {"while_bound_cap", cfg.while_bound_cap},
      {"while_increments", cfg.while_increments},
      {"allowed_stmt_kinds", kinds},
      {"allow_var_index", cfg.allow_var_index},
      {"allow_var_var_operands", cfg.allow_var_var_operands},
      {"allow_while_true", cfg.allow_while_true},
      {"mean_stmts", cfg.mean_stmts},
      {"mean_block_stmts", cfg.mean_block_stmts},
      {"fresh_var_prob", cfg.fresh_var_prob},
      {"int_params", range(cfg.int_params)},
      {"list_params", range(cfg.list_params)},
      {"bool_params", range(cfg.bool_params)},
      {"int_names", cfg.int_names},
      {"list_names", cfg.list_names},
      {"bool_names", cfg.bool_names},
      {"counter_name", cfg.counter_name},
      {"max_program_retries", cfg.max_program_retries},
  };
}

namespace {

std::pair<int, int> read_range(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 2) {
    throw std::invalid_argument(std::string("config key '") + key + "' must be [lo, hi]");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

GenConfig gen_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("generator config must be a JSON object");
  GenConfig cfg;
  static const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const auto defaults = gen_config_to_json(GenConfig{});
    for (auto& [k, v] : defaults.items()) keys.insert(k);
    keys.insert("list_size_regime");
    return keys;
  }();
  for (auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("seed", cfg.seed);
    get("max_loc", cfg.max_loc);
    get("max_scope_depth", cfg.max_scope_depth);
    get("max_expansion_depth", cfg.max_expansion_depth);
    get("int_cap", cfg.int_cap);
    get("literal_cap", cfg.literal_cap);
    get("element_cap", cfg.element_cap);
    if (j.contains("list_size_regime")) {
      const auto regime = j.at("list_size_regime").get<std::string>();
      if (regime == "short") {
        cfg.apply_regime(ListSizeRegime::Short);
      } else if (regime == "medium") {
        cfg.apply_regime(ListSizeRegime::Medium);
      } else if (regime == "long") {
        cfg.apply_regime(ListSizeRegime::Long);
      } else {
        throw std::invalid_argument("list_size_regime must be short, medium or long");
      }
    }
    if (j.contains("list_len_range")) {
      cfg.list_len_range = read_range(j.at("list_len_range"), "list_len_range");
    }
    get("while_bound_cap", cfg.while_bound_cap);
    get("while_increments", cfg.while_increments);
    if (j.contains("allowed_stmt_kinds")) {
      cfg.allowed_stmt_kinds.clear();
      for (const auto& k : j.at("allowed_stmt_kinds")) {
        cfg.allowed_stmt_kinds.push_back(stmt_kind_from_string(k.get<std::string>()));
      }
    }
    get("allow_var_index", cfg.allow_var_index);
    get("allow_var_var_operands", cfg.allow_var_var_operands);
    get("allow_while_true", cfg.allow_while_true);
    get("mean_stmts", cfg.mean_stmts);
    get("mean_block_stmts", cfg.mean_block_stmts);
    get("fresh_var_prob", cfg.fresh_var_prob);
    if (j.contains("int_params")) cfg.int_params = read_range(j.at("int_params"), "int_params");
    if (j.contains("list_params")) {
      cfg.list_params = read_range(j.at("list_params"), "list_params");
    }
    if (j.contains("bool_params")) {
      cfg.bool_params = read_range(j.at("bool_params"), "bool_params");
    }
    get("int_names", cfg.int_names);
    get("list_names", cfg.list_names);
    get("bool_names", cfg.bool_names);
    get("counter_name", cfg.counter_name);
    get("max_program_retries", cfg.max_program_retries);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad generator config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace tracebench

namespace tracebench {

json split_config_to_json(const SplitConfig& cfg) {
  json bins = json::array();
  for (const auto& b : cfg.bins) {
    bins.push_back({{"label", b.label},
                    {"lo", b.lo},
                    {"hi", b.hi},
                    {"target_count", b.target_count},
                    {"target_mean", b.target_mean}});
  }
  return {{"gen", gen_config_to_json(cfg.gen)},
          {"bins", bins},
          {"pool_size", cfg.build.pool_size},
          {"input_retry_budget", cfg.build.input_retry_budget},
          {"step_limit", cfg.build.step_limit},
          {"max_attempts", cfg.max_attempts}};
}

SplitConfig split_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("split config must be a JSON object");
  static const std::set<std::string> known{"gen",        "bins",         "pool_size",
                                           "input_retry_budget", "step_limit", "max_attempts"};
  for (auto& [k, v] : j.items()) {
    if (!known.count(k)) throw std::invalid_argument("unknown split config key '" + k + "'");
  }
  SplitConfig cfg;
  try {
    if (j.contains("gen")) cfg.gen = gen_config_from_json(j.at("gen"));
    if (j.contains("bins")) {
      cfg.bins.clear();
      for (const auto& b : j.at("bins")) {
        cfg.bins.push_back({b.at("label").get<std::string>(), b.at("lo").get<int>(),
                            b.at("hi").get<int>(), b.value("target_count", 500),
                            b.value("target_mean", 0.0)});
      }
    }
    cfg.build.pool_size = j.value("pool_size", cfg.build.pool_size);
    cfg.build.input_retry_budget = j.value("input_retry_budget", cfg.build.input_retry_budget);
    cfg.build.step_limit = j.value("step_limit", cfg.build.step_limit);
    cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad split config: ") + e.what());
  }
  if (cfg.build.pool_size < 1) throw std::invalid_argument("pool_size must be at least 1");
  validate_bins(cfg.bins);
  return cfg;
}

}  // namespace tracebench

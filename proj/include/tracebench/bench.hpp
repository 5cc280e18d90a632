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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracebench/generator.hpp"
#include "tracebench/program.hpp"
#include "tracebench/trace.hpp"

namespace tracebench {

// A verified (input, trace) pair for one program.
struct Exemplar {
  std::vector<Value> args;
  std::string call_text;
  Trace trace;
  friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct BinSpec {
  std::string label;
  int lo = 0;  // inclusive step-count range
  int hi = 0;
  int target_count = 500;
  double target_mean = 0.0;
  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

// short/medium/long/xlong with calibrated step ranges and the reference means
// {13, 80, 164, 246}.
std::vector<BinSpec> default_bins();

// Throws std::invalid_argument on empty or overlapping ranges.
void validate_bins(const std::vector<BinSpec>& bins);

// Index of the bin whose range contains n_steps.
std::optional<std::size_t> assign_bin(int n_steps, const std::vector<BinSpec>& bins);

struct TaskInstance {
  std::string id;
  Program program;
  std::vector<Exemplar> pool;
  Exemplar test;
  std::string bin;
  int n_steps = 0;  // gold trace length of the test exemplar
  std::uint64_t seed = 0;
  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct BuildOptions {
  int pool_size = 64;
  // Rejected inputs (execution errors or duplicate argument tuples) tolerated
  // per program before the program is discarded.
  int input_retry_budget = 200;
  std::size_t step_limit = kDefaultStepLimit;
};

// Rejection-samples verified inputs for `program`: the test exemplar first,
// then pool_size pool exemplars, all with pairwise distinct arguments.
// Returns nullopt when the retry budget runs out or `keep_test` declines the
// test trace length.
std::optional<TaskInstance> build_instance_for(
    const Program& program, const GenConfig& cfg, const BuildOptions& options, Rng& rng,
    const std::function<bool(int)>& keep_test = {});

// Generates a program and builds an instance for it.
std::optional<TaskInstance> build_instance(const GenConfig& cfg, const BuildOptions& options,
                                           Rng& rng);

struct SplitConfig {
  GenConfig gen;  // gen.seed seeds the whole split
  BuildOptions build;
  std::vector<BinSpec> bins = default_bins();
  std::size_t max_attempts = 5'000'000;
  unsigned threads = 1;
};

// Keeps building instances (attempt i uses derive_seed(seed, i)) until every
// bin holds target_count instances. Output is sorted by (bin order, id) and
// does not depend on `threads`. Throws GenerationExhausted past max_attempts.
std::vector<TaskInstance> build_split(const SplitConfig& cfg);

// Re-executes every exemplar; returns a description of the first mismatch.
std::optional<std::string> verify_instance(const TaskInstance& instance,
                                           std::size_t step_limit = kDefaultStepLimit);

// ---------------------------------------------------------------------------
// Dataset files: one JSON record per line, header first.

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetHeader {
  int schema_version = kDatasetSchemaVersion;
  std::uint64_t seed = 0;
  GenConfig gen;
  std::string cfg_hash;
  int pool_size = 64;
  std::vector<BinSpec> bins;
  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<TaskInstance> instances;
  friend bool operator==(const Dataset&, const Dataset&) = default;

  const TaskInstance* find(std::string_view id) const;
};

class DatasetError : public std::runtime_error {
 public:
  // record_index is the 0-based line number in the file (0 = header).
  DatasetError(std::size_t record_index, const std::string& what)
      : std::runtime_error("dataset record " + std::to_string(record_index) + ": " + what),
        record_index_(record_index) {}
  std::size_t record_index() const { return record_index_; }

 private:
  std::size_t record_index_;
};

Dataset make_dataset(const SplitConfig& cfg, std::vector<TaskInstance> instances);

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Builds a split straight to disk. Produces the same bytes as
// save_dataset(make_dataset(cfg, build_split(cfg))) while keeping only the
// serialized records in memory. Returns the number of instances written.
std::size_t write_split(const SplitConfig& cfg, const std::filesystem::path& path);

// Streams a dataset file: on_header once, then on_instance per record in file
// order. Either callback may be empty.
void scan_dataset(const std::filesystem::path& path,
                  const std::function<void(const DatasetHeader&)>& on_header,
                  const std::function<void(TaskInstance&&)>& on_instance);

// Content hash of a dataset file, as recorded by evaluation runs.
std::string dataset_file_hash(const std::filesystem::path& path);

}  // namespace tracebench

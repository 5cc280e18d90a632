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

#include <filesystem>

#include <json.hpp>

#include "tracebench/bench.hpp"
#include "tracebench/generator.hpp"

namespace tracebench {

// Key names match the GenConfig field names; missing keys keep defaults and
// unknown keys are rejected.
nlohmann::json gen_config_to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

// Dataset build settings: {"gen": {...}, "bins": [...], "pool_size",
// "input_retry_budget", "step_limit", "max_attempts"}, every key optional.
nlohmann::json split_config_to_json(const SplitConfig& cfg);
SplitConfig split_config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace tracebench

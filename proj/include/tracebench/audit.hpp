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

#include <span>
#include <string>
#include <vector>

#include "tracebench/generator.hpp"

namespace tracebench {

struct AuditLimits {
  int max_loc = 50;
  int max_depth = 1;  // block nesting below the function body
  Int while_bound_cap = 100;

  static AuditLimits from(const GenConfig& cfg) {
    return {cfg.max_loc, cfg.max_scope_depth, cfg.while_bound_cap};
  }
};

// Checks a rendered listing against the grammar restrictions working on the
// text alone: line count, indentation depth, statement shapes, operators
// limited to + - == !=, at most one variable per binary expression, literal
// list subscripts, no `else:` and counted loops whose bound is within the cap
// and divisible by the increment. Returns one message per violation.
std::vector<std::string> audit_listing(std::span<const std::string> lines,
                                       const AuditLimits& limits = {});

}  // namespace tracebench

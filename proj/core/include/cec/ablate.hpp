// Copyright 2026 The CEC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/config.hpp"
#include "cec/metrics.hpp"
#include "cec/pipeline.hpp"

namespace cec {

enum class AblateAxis { kWayShot, kRotation, kClassifierKind, kSwitches };

std::string_view axis_name(AblateAxis axis);
AblateAxis parse_axis(std::string_view name);

/// The grid each axis sweeps when none is given:
///   way-shot         {"ways": [1,5,10,15,20], "shots": [1,5,10,15,20]}
///   rotation-degrees {"pools": [[180], [90,-90], ..., [180,90,-90]]}
///   classifier-kind  {"kinds": ["linear", "cosine", "neg-l2"]}
///   switches         {"rows": [{"decoupled":..., "data_init":..., ...}, ...]}
nlohmann::json default_grid(AblateAxis axis);

struct AblateCell {
  std::string label;
  ExperimentConfig config;
};

/// One config per grid point. Cells keep the base seed, so data, split and
/// encoder are shared, and get cell index i + 1 for their own PIL and run
/// seeds.
std::vector<AblateCell> ablation_cells(AblateAxis axis, const nlohmann::json& grid,
                                       const ExperimentConfig& base);

struct AblateRow {
  std::string label;
  SessionMetrics metrics;
};

std::vector<AblateRow> run_ablation(std::span<const AblateCell> cells, const Prepared& prepared);

/// "config,session_0,...,session_n,avg,pd" with percentages to two decimals.
std::string ablation_csv(std::span<const AblateRow> rows);

}  // namespace cec

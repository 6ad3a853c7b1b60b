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

#include "cec/ablate.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace cec {

std::string_view axis_name(AblateAxis axis) {
  switch (axis) {
    case AblateAxis::kWayShot: return "way-shot";
    case AblateAxis::kRotation: return "rotation-degrees";
    case AblateAxis::kClassifierKind: return "classifier-kind";
    case AblateAxis::kSwitches: return "switches";
  }
  return "unknown";
}

AblateAxis parse_axis(std::string_view name) {
  for (AblateAxis a : {AblateAxis::kWayShot, AblateAxis::kRotation, AblateAxis::kClassifierKind,
                       AblateAxis::kSwitches}) {
    if (axis_name(a) == name) return a;
  }
  throw std::invalid_argument(fmt::format("unknown ablation axis '{}'", name));
}

nlohmann::json default_grid(AblateAxis axis) {
  using nlohmann::json;
  switch (axis) {
    case AblateAxis::kWayShot:
      return {{"ways", {1, 5, 10, 15, 20}}, {"shots", {1, 5, 10, 15, 20}}};
    case AblateAxis::kRotation:
      return {{"pools", json::array({json::array({180}), json::array({90, -90}),
                                     json::array({45, -45}), json::array({20, -20}),
                                     json::array({10, -10}), json::array({5, -5}),
                                     json::array({180, 90, -90})})}};
    case AblateAxis::kClassifierKind:
      return {{"kinds", {"linear", "cosine", "neg-l2"}}};
    case AblateAxis::kSwitches: {
      auto row = [](bool dec, bool init, bool am, bool pil) {
        return json{{"decoupled", dec}, {"data_init", init}, {"adapter", am}, {"pil", pil}};
      };
      return {{"rows", json::array({row(false, false, false, false), row(true, false, false, false),
                                    row(true, true, false, false), row(true, true, true, false),
                                    row(true, true, true, true)})}};
    }
  }
  return {};
}

std::vector<AblateCell> ablation_cells(AblateAxis axis, const nlohmann::json& grid,
                                       const ExperimentConfig& base) {
  std::vector<AblateCell> cells;
  auto push = [&](std::string label, ExperimentConfig c) {
    c.cell = cells.size() + 1;
    cells.push_back({std::move(label), std::move(c)});
  };
  switch (axis) {
    case AblateAxis::kWayShot:
      for (std::size_t way : grid.at("ways").get<std::vector<std::size_t>>()) {
        for (std::size_t shot : grid.at("shots").get<std::vector<std::size_t>>()) {
          ExperimentConfig c = base;
          c.pil.way = way;
          c.pil.shot = shot;
          c.run.switches.adapter = c.run.switches.pil = true;
          push(fmt::format("way={} shot={}", way, shot), c);
        }
      }
      break;
    case AblateAxis::kRotation:
      for (const auto& pool : grid.at("pools")) {
        ExperimentConfig c = base;
        c.pil.angle_pool = pool.get<std::vector<double>>();
        c.run.switches.adapter = c.run.switches.pil = true;
        push(fmt::format("angles={}", fmt::join(c.pil.angle_pool, "|")), c);
      }
      break;
    case AblateAxis::kClassifierKind:
      for (const auto& kind : grid.at("kinds")) {
        ExperimentConfig c = base;
        c.run.head = parse_head_kind(kind.get<std::string>());
        push(fmt::format("head={}", head_name(c.run.head)), c);
      }
      break;
    case AblateAxis::kSwitches:
      for (const auto& row : grid.at("rows")) {
        ExperimentConfig c = base;
        Switches& s = c.run.switches;
        s.decoupled = row.value("decoupled", s.decoupled);
        s.data_init = row.value("data_init", s.data_init);
        s.adapter = row.value("adapter", s.adapter);
        s.pil = row.value("pil", s.pil);
        push(fmt::format("decoupled={} data_init={} adapter={} pil={}", s.decoupled, s.data_init,
                         s.adapter, s.pil),
             c);
      }
      break;
  }
  if (cells.empty()) throw std::invalid_argument("ablation grid is empty");
  return cells;
}

std::vector<AblateRow> run_ablation(std::span<const AblateCell> cells, const Prepared& prepared) {
  std::vector<AblateRow> rows;
  for (const AblateCell& cell : cells) {
    rows.push_back({cell.label, run_experiment(cell.config, prepared).run.metrics});
  }
  return rows;
}

std::string ablation_csv(std::span<const AblateRow> rows) {
  std::size_t sessions = 0;
  for (const AblateRow& r : rows) sessions = std::max(sessions, r.metrics.accuracies.size());
  std::string out = "config";
  for (std::size_t i = 0; i < sessions; ++i) out += fmt::format(",session_{}", i);
  out += ",avg,pd\n";
  for (const AblateRow& r : rows) {
    out += r.label;
    for (std::size_t i = 0; i < sessions; ++i) {
      out += i < r.metrics.accuracies.size() ? fmt::format(",{:.2f}", 100.0 * r.metrics.accuracies[i])
                                             : std::string(",");
    }
    out += fmt::format(",{:.2f},{:.2f}\n", 100.0 * r.metrics.avg, 100.0 * r.metrics.pd);
  }
  return out;
}

}  // namespace cec

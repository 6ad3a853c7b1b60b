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

#include "cec/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace cec {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) n += row_sum(r);
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) n += counts[r][r];
  return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  return std::accumulate(counts.at(row).begin(), counts.at(row).end(), std::size_t{0});
}

std::size_t ConfusionMatrix::index_of(int class_id) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), class_id);
  if (it == classes.end() || *it != class_id) {
    throw std::out_of_range(fmt::format("class {} is not in the confusion matrix", class_id));
  }
  return static_cast<std::size_t>(it - classes.begin());
}

std::string ConfusionMatrix::to_csv() const {
  std::string out;
  for (const auto& row : counts) out += fmt::format("{}\n", fmt::join(row, ","));
  return out;
}

double compute_pd(std::span<const double> accuracies) {
  if (accuracies.empty()) throw std::invalid_argument("compute_pd: no sessions");
  return accuracies.front() - accuracies.back();
}

double average_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw std::invalid_argument("average_accuracy: no sessions");
  return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
         static_cast<double>(accuracies.size());
}

void finalize(SessionMetrics& m) {
  m.pd = compute_pd(m.accuracies);
  m.avg = average_accuracy(m.accuracies);
}

std::string sessions_csv(const SessionMetrics& m) {
  std::string out = "session,classes,accuracy\n";
  for (std::size_t i = 0; i < m.accuracies.size(); ++i) {
    out += fmt::format("{},{},{:.2f}\n", i, m.classes.at(i), 100.0 * m.accuracies[i]);
  }
  return out;
}

nlohmann::json metrics_to_json(const SessionMetrics& m) {
  return {{"accuracies", m.accuracies},
          {"classes", m.classes},
          {"test_counts", m.test_counts},
          {"pd", m.pd},
          {"avg", m.avg}};
}

}  // namespace cec

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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cec {

/// Rows are ground-truth classes, columns predictions, both in `classes`
/// order (ascending class id).
struct ConfusionMatrix {
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t row) const;
  std::size_t index_of(int class_id) const;
  /// Plain integer CSV, one line per ground-truth class, no header.
  std::string to_csv() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct SessionMetrics {
  std::vector<double> accuracies;       // fractions in [0, 1], session order
  std::vector<std::size_t> classes;     // classes seen by each session
  std::vector<std::size_t> test_counts; // cumulative test pool size
  std::vector<ConfusionMatrix> confusions;
  double pd = 0.0;
  double avg = 0.0;
};

/// First minus last accuracy, in the units of the input.
double compute_pd(std::span<const double> accuracies);
double average_accuracy(std::span<const double> accuracies);

/// Fills pd and avg from the accuracies.
void finalize(SessionMetrics& m);

/// "session,classes,accuracy" with percentages to two decimals.
std::string sessions_csv(const SessionMetrics& m);
nlohmann::json metrics_to_json(const SessionMetrics& m);

}  // namespace cec

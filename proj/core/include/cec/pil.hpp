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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/adapter.hpp"
#include "cec/dataset.hpp"
#include "cec/encoder.hpp"
#include "cec/optim.hpp"

namespace cec {

struct PilConfig {
  std::size_t way = 15;
  std::size_t shot = 1;
  std::size_t query = 10;
  std::vector<double> angle_pool{90.0, 180.0, 270.0};
  std::size_t iterations = 5000;
  double learning_rate = 2e-4;
  double lr_decay = 0.5;
  std::size_t decay_every = 1000;
  double momentum = 0.9;
  double last_layer_lr_ratio = 0.1;  // 0 keeps the encoder fixed
  std::size_t inner_epochs = 0;      // head fit after Data Init
  double inner_lr = 0.1;
  HeadKind head = HeadKind::kCosine;
  double scale = kDefaultCosineScale;
  bool augment = true;
  /// false: both class groups form one head, i.e. plain episodic training
  /// with no simulated incremental session.
  bool incremental = true;
  std::uint64_t seed = 0;
  AdapterConfig adapter;
  friend bool operator==(const PilConfig&, const PilConfig&) = default;
};

void to_json(nlohmann::json& j, const PilConfig& c);
void from_json(const nlohmann::json& j, PilConfig& c);
void validate(const PilConfig& c);

/// Step decay: lr * lr_decay^(iteration / decay_every).
double pil_learning_rate(const PilConfig& c, std::size_t iteration);

struct PilState {
  AdapterParams adapter;
  EncoderParams encoder;
  SgdState adapter_opt;
  SgdState last_layer_opt;
};

PilState make_pil_state(const EncoderParams& encoder, const AdapterParams& adapter,
                        const PilConfig& config);

struct PilStep {
  double loss = 0.0;
  PilState state;
};

/// One pseudo-incremental episode: sample, build Data-Init heads for the
/// pseudo-base and rotated pseudo-novel classes on their support sets, adapt
/// the two-head bank, score all queries, and take one SGD step on the adapter
/// (and the encoder's last layer when enabled). Head fitting is not
/// differentiated. Pure in (state, data, config, seed, lr).
PilStep pil_iteration(const PilState& state, const Dataset& data, std::span<const int> base_classes,
                      const PilConfig& config, std::uint64_t iteration_seed, double lr);

struct PilLogEntry {
  std::size_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct PilResult {
  AdapterParams adapter;
  EncoderParams encoder;
  std::vector<PilLogEntry> log;
};

/// Runs config.iterations episodes with seeds derived from config.seed and
/// the iteration index. Throws DivergenceError naming the iteration on a
/// non-finite loss.
PilResult run_pil(const EncoderParams& encoder, const Dataset& data,
                  std::span<const int> base_classes, const PilConfig& config,
                  const std::optional<AdapterParams>& init = std::nullopt);

/// Seed of iteration `it` under base seed `seed`.
std::uint64_t pil_iteration_seed(std::uint64_t seed, std::size_t it);

/// "iteration,loss,lr" CSV.
std::string loss_log_csv(std::span<const PilLogEntry> log);

}  // namespace cec

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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/config.hpp"
#include "cec/dataset.hpp"
#include "cec/harness.hpp"
#include "cec/pil.hpp"
#include "cec/session_split.hpp"

namespace cec {

std::string version();

Dataset build_dataset(const ExperimentConfig& c);
SessionSplit build_split(const ExperimentConfig& c, const Dataset& data);

struct EncoderStage {
  EncoderParams encoder;
  std::optional<ClassifierWeights> base_head;  // pretrained linear head
  std::vector<double> epoch_losses;
  std::optional<double> train_accuracy;
};

/// Loads the encoder checkpoint when one is configured, otherwise pretrains
/// on the base session.
EncoderStage obtain_encoder(const ExperimentConfig& c, const Dataset& data,
                            const SessionSplit& split);

/// The episode configuration actually used for adapter training. With the
/// pil switch off the adapter is trained on plain episodes: no rotation and
/// a single head over both class groups.
PilConfig effective_pil_config(const ExperimentConfig& c);
RunConfig effective_run_config(const ExperimentConfig& c);

struct AdapterStage {
  AdapterParams adapter;
  EncoderParams deployed_encoder;
  std::vector<PilLogEntry> log;
};

AdapterStage obtain_adapter(const ExperimentConfig& c, const Dataset& data,
                            const SessionSplit& split, const EncoderParams& encoder);

/// Data, split and encoder: the parts shared by every ablation cell.
struct Prepared {
  Dataset data;
  SessionSplit split;
  EncoderStage encoder;
};

Prepared prepare(const ExperimentConfig& c);

struct ExperimentResult {
  RunResult run;
  std::optional<AdapterStage> adapter;
  nlohmann::json metrics;  // the metrics.json document
};

ExperimentResult run_experiment(const ExperimentConfig& c, const Prepared& prepared);

/// metrics.json, sessions.csv, confusion_<i>.csv, loss_log.csv,
/// manifest.json and checkpoints/ under `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& c,
                       const Prepared& prepared, const ExperimentResult& result);

}  // namespace cec

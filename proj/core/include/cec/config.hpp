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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cec/encoder.hpp"
#include "cec/harness.hpp"
#include "cec/pil.hpp"
#include "cec/synth.hpp"

namespace cec {

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "cifar100"
  std::size_t classes = 20;
  std::size_t train_per_class = 40;
  std::size_t test_per_class = 30;
  std::size_t side = 16;
  BlobStyle style;
  std::string cifar_dir;
};

struct SplitConfig {
  std::size_t base = 12;
  std::size_t sessions = 4;  // incremental sessions after the base one
  std::size_t way = 2;
  std::size_t shot = 5;
};

struct CheckpointConfig {
  std::string encoder;  // empty: pretrain
  std::string adapter;  // empty: train with PIL (or plain episodes)
  std::string base_head;
};

/// Everything one experiment needs. Stage seeds derive from `seed`; `cell`
/// separates ablation cells that share data, split and encoder.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::uint64_t cell = 0;
  DataConfig data;
  SplitConfig split;
  EncoderConfig encoder;
  PretrainConfig pretrain;
  PilConfig pil;
  RunConfig run;
  CheckpointConfig checkpoints;
  std::size_t threads = 1;
};

void to_json(nlohmann::json& j, const DataConfig& c);
void from_json(const nlohmann::json& j, DataConfig& c);
void to_json(nlohmann::json& j, const SplitConfig& c);
void from_json(const nlohmann::json& j, SplitConfig& c);
void to_json(nlohmann::json& j, const CheckpointConfig& c);
void from_json(const nlohmann::json& j, CheckpointConfig& c);

/// `threads` is not part of the echo.
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value" to a config document. The value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Desk-scale defaults: synthetic blobs, 12 base classes, four 2-way 5-shot
/// sessions, tiny-cnn encoder, short PIL.
ExperimentConfig desk_config(std::uint64_t seed);

enum class SeedStream : std::uint64_t { kData = 1, kSplit, kPretrain, kPil, kRun };
std::uint64_t stage_seed(const ExperimentConfig& c, SeedStream stream);

}  // namespace cec

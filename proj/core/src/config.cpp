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

#include "cec/config.hpp"

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/param_io.hpp"
#include "cec/random.hpp"

namespace cec {

void to_json(nlohmann::json& j, const DataConfig& c) {
  j = {{"source", c.source},       {"classes", c.classes},
       {"train_per_class", c.train_per_class}, {"test_per_class", c.test_per_class},
       {"side", c.side},           {"style", c.style},
       {"cifar_dir", c.cifar_dir}};
}

void from_json(const nlohmann::json& j, DataConfig& c) {
  DataConfig d;
  c.source = j.value("source", d.source);
  c.classes = j.value("classes", d.classes);
  c.train_per_class = j.value("train_per_class", d.train_per_class);
  c.test_per_class = j.value("test_per_class", d.test_per_class);
  c.side = j.value("side", d.side);
  c.style = j.value("style", d.style);
  c.cifar_dir = j.value("cifar_dir", d.cifar_dir);
}

void to_json(nlohmann::json& j, const SplitConfig& c) {
  j = {{"base", c.base}, {"sessions", c.sessions}, {"way", c.way}, {"shot", c.shot}};
}

void from_json(const nlohmann::json& j, SplitConfig& c) {
  SplitConfig d;
  c.base = j.value("base", d.base);
  c.sessions = j.value("sessions", d.sessions);
  c.way = j.value("way", d.way);
  c.shot = j.value("shot", d.shot);
}

void to_json(nlohmann::json& j, const CheckpointConfig& c) {
  j = {{"encoder", c.encoder}, {"adapter", c.adapter}, {"base_head", c.base_head}};
}

void from_json(const nlohmann::json& j, CheckpointConfig& c) {
  c.encoder = j.value("encoder", std::string());
  c.adapter = j.value("adapter", std::string());
  c.base_head = j.value("base_head", std::string());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"seed", c.seed},
          {"cell", c.cell},
          {"data", c.data},
          {"split", c.split},
          {"encoder", c.encoder},
          {"pretrain", c.pretrain},
          {"pil", c.pil},
          {"run", c.run},
          {"checkpoints", c.checkpoints}};
}

namespace {

// Every key of `given` must name a field of the parsed config, at any depth.
void check_known_keys(const nlohmann::json& given, const nlohmann::json& known,
                      const std::string& prefix) {
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw FormatError(fmt::format("unknown config key '{}'", path));
    if (value.is_object() && known.at(key).is_object()) check_known_keys(value, known.at(key), path);
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  ExperimentConfig c;
  nlohmann::json known = config_to_json(c);
  known["threads"] = c.threads;
  check_known_keys(j, known, "");
  try {
    c.seed = j.value("seed", c.seed);
    c.cell = j.value("cell", c.cell);
    c.data = j.value("data", c.data);
    c.split = j.value("split", c.split);
    c.encoder = j.value("encoder", c.encoder);
    c.pretrain = j.value("pretrain", c.pretrain);
    c.pil = j.value("pil", c.pil);
    c.run = j.value("run", c.run);
    c.checkpoints = j.value("checkpoints", c.checkpoints);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("bad config: {}", e.what()));
  }
  c.run.threads = c.threads;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument(fmt::format("override '{}' is not key=value", assignment));
  }
  std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  std::string pointer = "/" + key;
  for (char& ch : pointer) {
    if (ch == '.') ch = '/';
  }
  doc[nlohmann::json::json_pointer(pointer)] = value;
}

ExperimentConfig desk_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  // Blob classes are chiral, so mirroring would merge a class with a
  // different one; keep the crop jitter to one pixel at 16x16.
  c.encoder.augment.horizontal_flip = false;
  c.encoder.augment.crop_padding = 1;
  c.pil.way = 6;
  c.pil.shot = 5;
  c.pil.query = 5;
  c.pil.iterations = 300;
  c.pil.learning_rate = 0.01;
  c.pil.decay_every = 100;
  c.pil.last_layer_lr_ratio = 0.1;
  c.pil.augment = false;
  c.pil.adapter.dropout = 0.0;
  return c;
}

std::uint64_t stage_seed(const ExperimentConfig& c, SeedStream stream) {
  const std::uint64_t base = derive_seed(c.seed, static_cast<std::uint64_t>(stream));
  switch (stream) {
    case SeedStream::kPil:
    case SeedStream::kRun:
      return derive_seed(base, c.cell);
    default:
      return base;
  }
}

}  // namespace cec

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

#include "cec/pipeline.hpp"

#include <fmt/format.h>

#include "cec/cifar.hpp"
#include "cec/error.hpp"
#include "cec/param_io.hpp"
#include "cec/synth.hpp"

#ifndef CEC_VERSION_STRING
#define CEC_VERSION_STRING "unknown"
#endif

namespace cec {

std::string version() { return CEC_VERSION_STRING; }

Dataset build_dataset(const ExperimentConfig& c) {
  if (c.data.source == "synthetic") {
    return synth_blob_dataset(c.data.classes, c.data.train_per_class, c.data.test_per_class,
                              c.data.side, stage_seed(c, SeedStream::kData), c.data.style);
  }
  if (c.data.source == "cifar100") {
    if (c.data.cifar_dir.empty()) throw std::invalid_argument("data.cifar_dir is not set");
    return load_cifar100_binary(c.data.cifar_dir);
  }
  throw std::invalid_argument(fmt::format("unknown data source '{}'", c.data.source));
}

SessionSplit build_split(const ExperimentConfig& c, const Dataset& data) {
  return make_session_split(data, c.split.base, c.split.sessions, c.split.way, c.split.shot,
                            stage_seed(c, SeedStream::kSplit));
}

EncoderStage obtain_encoder(const ExperimentConfig& c, const Dataset& data,
                            const SessionSplit& split) {
  EncoderStage stage;
  if (!c.checkpoints.encoder.empty()) {
    stage.encoder = encoder_from_document(load_params(c.checkpoints.encoder));
    if (stage.encoder.config.input != data.geometry()) {
      throw ShapeError("encoder checkpoint does not match the dataset geometry");
    }
  } else {
    EncoderConfig ec = c.encoder;
    ec.input = data.geometry();
    PretrainResult r = pretrain(data, split.sessions.at(0).classes, ec, c.pretrain,
                                stage_seed(c, SeedStream::kPretrain));
    stage.encoder = std::move(r.encoder);
    stage.base_head = std::move(r.head);
    stage.epoch_losses = std::move(r.epoch_losses);
    stage.train_accuracy = r.train_accuracy;
  }
  if (!c.checkpoints.base_head.empty()) {
    stage.base_head = head_from_document(load_params(c.checkpoints.base_head));
  }
  return stage;
}

PilConfig effective_pil_config(const ExperimentConfig& c) {
  PilConfig p = c.pil;
  p.seed = stage_seed(c, SeedStream::kPil);
  p.head = c.run.head;
  p.scale = c.run.scale;
  if (!c.run.switches.pil) {
    p.angle_pool = {0.0};
    p.incremental = false;
  }
  return p;
}

RunConfig effective_run_config(const ExperimentConfig& c) {
  RunConfig r = c.run;
  r.seed = stage_seed(c, SeedStream::kRun);
  r.threads = c.threads;
  return r;
}

AdapterStage obtain_adapter(const ExperimentConfig& c, const Dataset& data,
                            const SessionSplit& split, const EncoderParams& encoder) {
  AdapterStage stage;
  if (!c.checkpoints.adapter.empty()) {
    stage.adapter = adapter_from_document(load_params(c.checkpoints.adapter));
    stage.deployed_encoder = encoder;
    return stage;
  }
  PilResult r = run_pil(encoder, data, split.sessions.at(0).classes, effective_pil_config(c));
  stage.adapter = std::move(r.adapter);
  stage.deployed_encoder = std::move(r.encoder);
  stage.log = std::move(r.log);
  return stage;
}

Prepared prepare(const ExperimentConfig& c) {
  Prepared p;
  p.data = build_dataset(c);
  p.split = build_split(c, p.data);
  p.encoder = obtain_encoder(c, p.data, p.split);
  return p;
}

namespace {

std::string percent(double fraction) { return fmt::format("{:.2f}", 100.0 * fraction); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, const Prepared& prepared) {
  ExperimentResult out;
  const RunConfig rc = effective_run_config(c);
  const EncoderParams* deployed = &prepared.encoder.encoder;
  std::optional<AdapterParams> adapter;
  if (rc.switches.adapter) {
    out.adapter = obtain_adapter(c, prepared.data, prepared.split, prepared.encoder.encoder);
    adapter = out.adapter->adapter;
    deployed = &out.adapter->deployed_encoder;
  }
  out.run = run_incremental(*deployed, adapter, prepared.encoder.base_head, prepared.data,
                            prepared.split, rc);

  const SessionMetrics& m = out.run.metrics;
  nlohmann::json pct = nlohmann::json::array();
  for (double a : m.accuracies) pct.push_back(percent(a));
  const nlohmann::json cfg = config_to_json(c);
  out.metrics = metrics_to_json(m);
  out.metrics["accuracies_percent"] = pct;
  out.metrics["pd_percent"] = percent(m.pd);
  out.metrics["avg_percent"] = percent(m.avg);
  out.metrics["config"] = cfg;
  out.metrics["seeds"] = {{"seed", c.seed},
                          {"cell", c.cell},
                          {"data", stage_seed(c, SeedStream::kData)},
                          {"split", stage_seed(c, SeedStream::kSplit)},
                          {"pretrain", stage_seed(c, SeedStream::kPretrain)},
                          {"pil", stage_seed(c, SeedStream::kPil)},
                          {"run", stage_seed(c, SeedStream::kRun)}};
  out.metrics["digests"] = {
      {"code", sha256_hex("cec " + version())},
      {"config", sha256_hex(cfg.dump())},
      {"encoder_before", out.run.encoder_digest_before},
      {"encoder_after", out.run.encoder_digest_after},
      {"adapter", adapter ? nlohmann::json(params_digest(adapter->params)) : nlohmann::json()}};
  if (prepared.encoder.train_accuracy) {
    out.metrics["pretrain_train_accuracy"] = *prepared.encoder.train_accuracy;
  }
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& c,
                       const Prepared& prepared, const ExperimentResult& result) {
  const SessionMetrics& m = result.run.metrics;
  write_text_file(dir / "metrics.json", result.metrics.dump(2) + "\n");
  write_text_file(dir / "sessions.csv", sessions_csv(m));
  for (std::size_t i = 0; i < m.confusions.size(); ++i) {
    write_text_file(dir / fmt::format("confusion_{}.csv", i), m.confusions[i].to_csv());
  }
  const std::vector<PilLogEntry> empty;
  write_text_file(dir / "loss_log.csv",
                  loss_log_csv(result.adapter ? result.adapter->log : empty));

  nlohmann::json manifest = {{"version", version()},
                             {"config", config_to_json(c)},
                             {"split", split_to_json(prepared.split)}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  const std::filesystem::path ck = dir / "checkpoints";
  save_params(ck / "encoder.json", encoder_to_document(prepared.encoder.encoder));
  if (prepared.encoder.base_head) {
    save_params(ck / "base_head.json", head_to_document(*prepared.encoder.base_head));
  }
  if (result.adapter) {
    save_params(ck / "adapter.json", adapter_to_document(result.adapter->adapter));
    save_params(ck / "encoder_deployed.json", encoder_to_document(result.adapter->deployed_encoder));
  }
}

}  // namespace cec

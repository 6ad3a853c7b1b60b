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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/adapter.hpp"
#include "cec/dataset.hpp"
#include "cec/encoder.hpp"
#include "cec/heads.hpp"
#include "cec/metrics.hpp"
#include "cec/session_split.hpp"

namespace cec {

/// The component switches of an ablation row.
struct Switches {
  bool decoupled = true;  // off: finetune the whole network in new sessions
  bool data_init = true;  // off: random init + head fit
  bool adapter = false;
  bool pil = false;       // how the adapter was trained; used by the pipeline
  friend bool operator==(const Switches&, const Switches&) = default;
};

enum class BaseHead { kDataInit, kPretrained };

struct RunConfig {
  Switches switches;
  HeadKind head = HeadKind::kCosine;
  double scale = kDefaultCosineScale;
  std::size_t fit_epochs = 0;   // extra epochs after Data Init
  double fit_lr = kDefaultFitLearningRate;
  BaseHead base_head = BaseHead::kDataInit;
  std::size_t finetune_epochs = 20;  // decoupled = off only
  double finetune_lr = 0.05;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// The config echo leaves out `threads`, which cannot change results.
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

struct SessionTrace {
  std::size_t session = 0;
  ClassifierBank raw_bank;
  ClassifierWeights scoring_head;  // adapted (or raw) concatenated head
  Tensor logits;                   // [pool, classes], columns = scoring_head.class_ids
  std::vector<int> labels;
};

struct RunResult {
  SessionMetrics metrics;
  std::string encoder_digest_before;
  std::string encoder_digest_after;
  EncoderParams final_encoder;
};

using SessionObserver = std::function<void(const SessionTrace&)>;

/// The incremental session loop. Session 0 gets a head over the base classes
/// (Data Init from every base training image, or the pretrained linear head);
/// each later session embeds its shot images, learns a head and appends it to
/// the raw bank. When the adapter is on the whole raw bank is adapted afresh
/// every session; the adapted rows are used for scoring only. With
/// decoupled = off the encoder and all heads are finetuned on each new
/// session's support set before evaluation.
RunResult run_incremental(const EncoderParams& encoder, const std::optional<AdapterParams>& adapter,
                          const std::optional<ClassifierWeights>& pretrained_head,
                          const Dataset& data, const SessionSplit& split, const RunConfig& config,
                          const SessionObserver& observer = {});

}  // namespace cec

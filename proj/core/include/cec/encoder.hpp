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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/augment.hpp"
#include "cec/dataset.hpp"
#include "cec/graph.hpp"
#include "cec/heads.hpp"
#include "cec/param_io.hpp"

namespace cec {

enum class EncoderKind { kMlp, kTinyCnn };

std::string_view encoder_name(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

/// tiny-cnn: conv3x3(hidden[0]) -> relu -> pool -> conv3x3(hidden[1]) -> relu
///           -> pool -> linear(embedding_dim)
/// mlp:      [linear(h) -> relu] for each h in hidden -> linear(embedding_dim)
struct EncoderConfig {
  EncoderKind kind = EncoderKind::kTinyCnn;
  ImageGeometry input{1, 16, 16};
  std::vector<std::size_t> hidden{8, 16};
  std::size_t embedding_dim = 32;
  AugmentConfig augment;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

/// Throws std::invalid_argument on an unusable configuration.
void validate(const EncoderConfig& config);

/// Layer tensors by name: conv1.k, conv2.k (tiny-cnn) or fc<i>.w, fc<i>.b
/// (mlp), then last.w [in, C] and last.b [1, C]. The last.* pair is the
/// designated last layer.
struct EncoderParams {
  EncoderConfig config;
  ParamSet params;
};

inline constexpr std::string_view kLastLayerPrefix = "last.";
bool is_last_layer(std::string_view name);

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);

enum class Trainable { kNone, kLastLayer, kAll };

/// Adds the encoder to `bg` on the [N, C*H*W] `input` node and returns the
/// [N, embedding_dim] embedding node. Encoder tensors selected by `trainable`
/// become parameters, the rest constants, all under their own names.
NodeId build_encoder(BoundGraph& bg, const EncoderParams& params, NodeId input,
                     Trainable trainable);

/// Frozen embeddings of a [N, C*H*W] batch. Row i depends only on image i.
/// `threads` > 1 splits the batch; results are bitwise identical.
Tensor embed(const EncoderParams& params, const Tensor& batch, std::size_t threads = 1);
Tensor embed(const EncoderParams& params, std::span<const Image* const> images,
             std::size_t threads = 1);

std::string params_digest(const EncoderParams& params);

ParamDocument encoder_to_document(const EncoderParams& params);
EncoderParams encoder_from_document(const ParamDocument& doc);

struct PretrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t lr_step = 0;  // decay every lr_step epochs; 0 keeps lr fixed
  double lr_gamma = 0.1;
  friend bool operator==(const PretrainConfig&, const PretrainConfig&) = default;
};

void to_json(nlohmann::json& j, const PretrainConfig& c);
void from_json(const nlohmann::json& j, PretrainConfig& c);

struct PretrainResult {
  EncoderParams encoder;
  ClassifierWeights head;           // linear head over `classes`
  double train_accuracy = 0.0;      // un-augmented base training data
  std::vector<double> epoch_losses; // mean minibatch loss per epoch
};

/// Supervised cross-entropy training of encoder + linear head on every
/// training image of `classes`, with the configured augmentation. Throws
/// DivergenceError naming the epoch if the loss stops being finite.
PretrainResult pretrain(const Dataset& data, std::span<const int> classes,
                        const EncoderConfig& config, const PretrainConfig& train,
                        std::uint64_t seed);

}  // namespace cec

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
#include <string_view>
#include <vector>

#include "cec/graph.hpp"
#include "cec/param_io.hpp"
#include "cec/tensor.hpp"

namespace cec {

enum class HeadKind { kLinear, kCosine, kNegL2 };

std::string_view head_name(HeadKind kind);
HeadKind parse_head_kind(std::string_view name);

inline constexpr double kDefaultCosineScale = 16.0;
inline constexpr std::size_t kDefaultFitEpochs = 100;
inline constexpr double kDefaultFitLearningRate = 0.1;

/// Per-class prototype matrix of one session head: row c of `weights` is the
/// weight vector of class_ids[c]. Only linear heads carry a bias ([1, N]).
struct ClassifierWeights {
  HeadKind kind = HeadKind::kCosine;
  Tensor weights;
  std::optional<Tensor> bias;
  double scale = kDefaultCosineScale;
  std::vector<int> class_ids;
  std::size_t session = 0;

  std::size_t num_classes() const { return class_ids.size(); }
  std::size_t dim() const { return weights.cols(); }
  std::size_t row_of(int class_id) const;
};

/// Data Init: row c is the mean embedding of samples labelled class_ids[c].
/// The class list defaults to the sorted distinct labels.
ClassifierWeights init_from_data(const Tensor& embeddings, std::span<const int> labels,
                                 HeadKind kind, double scale = kDefaultCosineScale);
ClassifierWeights init_from_data(const Tensor& embeddings, std::span<const int> labels,
                                 std::span<const int> class_ids, HeadKind kind,
                                 double scale = kDefaultCosineScale);

/// Seeded Glorot-uniform rows (zero bias for linear heads).
ClassifierWeights init_random(std::span<const int> class_ids, std::size_t dim, HeadKind kind,
                              std::uint64_t seed, double scale = kDefaultCosineScale);

/// Class scores of one embedding:
///   linear  w.f + b,   cosine  s <w/|w|, f/|f|>,   neg-l2  -|w - f|^2.
/// A zero-norm vector gives a cosine logit of 0.
std::vector<double> score(const ClassifierWeights& head, std::span<const double> embedding);
/// Row-wise score() for a [N, C] batch, giving [N, num_classes].
Tensor score_batch(const ClassifierWeights& head, const Tensor& embeddings);

/// Differentiable logits [Q, M] of `features` [Q, C] against prototype rows
/// `weights` [M, C].
NodeId head_logits(BoundGraph& bg, HeadKind kind, NodeId features, NodeId weights,
                   std::optional<NodeId> bias, double scale, std::size_t num_queries,
                   std::size_t num_classes, std::size_t dim);

/// Mean cross-entropy of the head on labelled embeddings.
double head_loss(const ClassifierWeights& head, const Tensor& embeddings,
                 std::span<const int> labels);

/// Cross-entropy + SGD (momentum 0.9) on the head parameters only; the
/// embeddings are constants. Minibatches of `batch_size` (0 = full batch) are
/// shuffled per epoch from `seed`.
ClassifierWeights fit_head(const ClassifierWeights& init, const Tensor& embeddings,
                           std::span<const int> labels, std::size_t epochs = kDefaultFitEpochs,
                           double lr = kDefaultFitLearningRate, std::uint64_t seed = 0,
                           std::size_t batch_size = 0);

/// Stacks several heads of one kind into one head over all their classes.
ClassifierWeights concatenate_heads(std::span<const ClassifierWeights> heads);

/// Maps labels (class ids) to row indices of `head`; throws on unknown ids.
std::vector<int> label_columns(const ClassifierWeights& head, std::span<const int> labels);

ParamDocument head_to_document(const ClassifierWeights& head);
ClassifierWeights head_from_document(const ParamDocument& doc);

}  // namespace cec

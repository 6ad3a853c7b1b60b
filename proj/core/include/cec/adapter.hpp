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
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/graph.hpp"
#include "cec/heads.hpp"
#include "cec/param_io.hpp"

namespace cec {

/// Pooled session heads, in session order. Flattening is session-major,
/// class-minor.
struct ClassifierBank {
  std::vector<ClassifierWeights> heads;

  /// Throws unless the bank is non-empty, of one head kind and dimension,
  /// and free of duplicate class ids.
  void validate() const;
  std::size_t rows() const;
  std::size_t dim() const;
  HeadKind kind() const;
  Tensor stacked() const;
  std::vector<int> class_ids() const;
  /// The same structure with its weight rows replaced by `rows` (biases kept).
  ClassifierBank with_rows(const Tensor& rows) const;
  ClassifierWeights concatenated() const;
};

struct AdapterConfig {
  std::size_t embedding_dim = 32;   // C
  std::size_t projection_dim = 0;   // d; 0 means d = C
  std::size_t heads = 1;
  bool layer_norm = false;
  double dropout = 0.1;             // training mode only
  bool query_node = false;          // append each query embedding as a node
  friend bool operator==(const AdapterConfig&, const AdapterConfig&) = default;

  std::size_t d() const { return projection_dim == 0 ? embedding_dim : projection_dim; }
};

void to_json(nlohmann::json& j, const AdapterConfig& c);
void from_json(const nlohmann::json& j, AdapterConfig& c);

/// Tensors per attention head h: adapter.phi.<h> [C, d], adapter.theta.<h>
/// [C, d], adapter.u.<h> [C, C]; with layer norm also adapter.ln.gain and
/// adapter.ln.bias [1, C].
struct AdapterParams {
  AdapterConfig config;
  ParamSet params;

  const Tensor& phi(std::size_t h = 0) const;
  const Tensor& theta(std::size_t h = 0) const;
  const Tensor& u(std::size_t h = 0) const;
};

/// phi/theta Glorot-uniform, U uniform in [-1e-3, 1e-3], layer-norm gain 1 and
/// bias 0.
AdapterParams init_adapter(const AdapterConfig& config, std::uint64_t seed);

ParamDocument adapter_to_document(const AdapterParams& params);
AdapterParams adapter_from_document(const ParamDocument& doc);

/// E[j][k] = <W[j] phi, W[k] theta> for attention head h, self-edges included.
Tensor relation_coefficients(const AdapterParams& params, const ClassifierBank& bank,
                             std::size_t head = 0);
Tensor relation_coefficients(const AdapterParams& params, const Tensor& rows, std::size_t head = 0);
/// Row-wise softmax.
Tensor attention_normalize(const Tensor& e);

struct AdaptMode {
  bool training = false;
  std::uint64_t dropout_seed = 0;

  static AdaptMode inference() { return {}; }
  static AdaptMode train(std::uint64_t seed) { return {true, seed}; }
};

/// Adds one synchronous attention pass over the [M, C] node `rows`:
///   W' = W + mean_h softmax((W phi_h)(W theta_h)^T) (W U_h^T)
/// followed by the optional layer norm. Returns the [M, C] node.
NodeId build_adapt(BoundGraph& bg, const AdapterParams& params, NodeId rows, std::size_t m,
                   const AdaptMode& mode, bool trainable);

/// Adapted bank: same heads, class ids and shapes, rows rewritten.
ClassifierBank adapt(const AdapterParams& params, const ClassifierBank& bank,
                     const AdaptMode& mode = AdaptMode::inference());

/// The query-node variant: `query` [1, C] joins the graph as an extra node and
/// is dropped from the output.
ClassifierBank adapt_with_query(const AdapterParams& params, const ClassifierBank& bank,
                                std::span<const double> query,
                                const AdaptMode& mode = AdaptMode::inference());

/// Adds adapt -> head scoring of `queries` [Q, C] -> cross-entropy on `labels`
/// (class ids of the bank). The bank enters as constants. Returns the loss
/// node; `logits_out` receives the [Q, M] logits node when given.
NodeId build_adapt_loss(BoundGraph& bg, const AdapterParams& params, const ClassifierBank& bank,
                        NodeId queries, std::size_t num_queries, std::span<const int> labels,
                        const AdaptMode& mode, bool trainable, NodeId* logits_out = nullptr);

struct AdaptLossGraph {
  BoundGraph bg;
  NodeId loss;
  NodeId logits;
};

/// Self-contained loss graph with constant query embeddings and trainable
/// adapter tensors.
AdaptLossGraph adapt_loss_graph(const AdapterParams& params, const ClassifierBank& bank,
                                const Tensor& query_embeddings, std::span<const int> labels,
                                const AdaptMode& mode = AdaptMode::inference());

}  // namespace cec

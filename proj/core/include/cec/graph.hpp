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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cec/tensor.hpp"

namespace cec {

/// Index of a node inside one Graph.
struct NodeId {
  std::uint32_t index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// The closed set of differentiable operations. Everything trainable in the
/// library is built from these.
enum class OpKind {
  kMatmul,
  kAdd,
  kMultiply,
  kScale,
  kRelu,
  kSoftmaxRows,
  kL2NormalizeRows,
  kMeanOverAxis,
  kConcatRows,
  kConv2dValid,
  kAvgPool2x2,
  kCrossEntropy,
  kTranspose,
};

std::string_view op_name(OpKind op);

/// Channel-planar image layout carried by the conv/pool ops. Image batches
/// are stored as [batch, channels*height*width] matrices.
struct ImageGeometry {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const ImageGeometry&, const ImageGeometry&) = default;
};

/// Output geometry of a valid 2-D convolution with `out_channels` kernels of
/// size kh x kw.
ImageGeometry conv_output_geometry(const ImageGeometry& in, std::size_t out_channels,
                                   std::size_t kh, std::size_t kw);
/// Output geometry of non-overlapping 2x2 average pooling (odd edges dropped).
ImageGeometry pool_output_geometry(const ImageGeometry& in);

struct OpParams {
  double scalar = 0.0;             // scale
  int axis = 0;                    // mean-over-axis
  ImageGeometry geometry;          // conv2d input / avgpool input
  std::size_t kernel_h = 0;        // conv2d
  std::size_t kernel_w = 0;
  std::vector<int> labels;         // cross-entropy target column per row
};

struct Node {
  std::optional<OpKind> op;        // empty for leaves
  bool trainable = false;          // leaves only
  std::string name;
  std::vector<NodeId> inputs;
  OpParams params;
};

using Bindings = std::map<NodeId, Tensor>;

struct BackwardResult {
  double loss = 0.0;
  std::map<NodeId, Tensor> grads;  // one entry per bound trainable leaf
};

/// A differentiable computation record. Nodes are appended in topological
/// order; leaves are bound to values at evaluation time.
///
/// Shapes are checked during forward(), where errors name the failing node.
/// A graph is not safe to evaluate from two threads at once.
class Graph {
 public:
  NodeId parameter(std::string name);
  NodeId constant(std::string name);

  NodeId matmul(NodeId a, NodeId b);
  /// Same-shape addition, or [N,D] + [1,D] with the row broadcast.
  NodeId add(NodeId a, NodeId b);
  NodeId multiply(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId relu(NodeId a);
  NodeId softmax_rows(NodeId a);
  NodeId l2_normalize_rows(NodeId a);
  /// axis 0: [N,D] -> [1,D]; axis 1: [N,D] -> [N,1].
  NodeId mean_over_axis(NodeId a, int axis);
  NodeId concat_rows(std::span<const NodeId> parts);
  /// input [N, Cin*H*W], kernel [Cout, Cin*kh*kw] -> [N, Cout*(H-kh+1)*(W-kw+1)].
  NodeId conv2d_valid(NodeId input, NodeId kernel, ImageGeometry geometry, std::size_t kh,
                      std::size_t kw);
  NodeId avgpool2x2(NodeId input, ImageGeometry geometry);
  /// Mean softmax cross-entropy over rows; labels are column indices.
  NodeId cross_entropy(NodeId logits, std::vector<int> labels);
  NodeId transpose(NodeId a);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const;
  NodeId last() const;
  std::vector<NodeId> trainable_leaves() const;
  std::vector<NodeId> nodes_of(OpKind op) const;

  /// Evaluates `root` and every node it depends on. Values are cached for
  /// backward() and value().
  const Tensor& forward(const Bindings& bindings, NodeId root);
  const Tensor& forward(const Bindings& bindings) { return forward(bindings, last()); }

  /// Forward plus reverse sweep. The root must hold a single value.
  BackwardResult backward(const Bindings& bindings, NodeId root);
  BackwardResult backward(const Bindings& bindings) { return backward(bindings, last()); }

  /// Cached forward value of a node evaluated by the last forward().
  const Tensor& value(NodeId id) const;

 private:
  NodeId push(Node node);
  std::vector<bool> reachable_from(NodeId root) const;
  Tensor eval_node(std::size_t i, const Bindings& bindings) const;
  void backprop_node(std::size_t i, const Tensor& grad_out, std::vector<Tensor>& grads,
                     std::vector<bool>& has_grad) const;
  std::string describe(std::size_t i) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> values_;
  std::vector<bool> evaluated_;
};

/// A graph together with the values of its leaves. Most model code builds
/// one of these per forward pass.
struct BoundGraph {
  Graph graph;
  Bindings bindings;
  std::map<std::string, NodeId> named;

  NodeId parameter(const std::string& name, Tensor value);
  NodeId constant(const std::string& name, Tensor value);
  /// Anonymous constant (ones vectors, masks, selectors).
  NodeId constant(Tensor value);
  NodeId at(const std::string& name) const;

  const Tensor& forward(NodeId root) { return graph.forward(bindings, root); }
  BackwardResult backward(NodeId root) { return graph.backward(bindings, root); }
  /// Gradients of the named trainable leaves, keyed by leaf name.
  ParamSet named_grads(const BackwardResult& result) const;
};

}  // namespace cec

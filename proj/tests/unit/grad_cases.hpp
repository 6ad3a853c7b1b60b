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

// Seeded scalar-loss graphs exercising each differentiable op, plus the
// composite heads/adapter losses. Shared by the unit tests and the
// acceptance gradient suite.

#include <functional>
#include <string>
#include <vector>

#include "cec/adapter.hpp"
#include "cec/graph.hpp"
#include "cec/heads.hpp"
#include "test_util.hpp"

namespace cec::testing {

struct GradCase {
  std::string name;
  std::function<std::pair<BoundGraph, NodeId>(std::uint64_t seed)> build;
};

/// Reduces any [R, C] node to a scalar through a random weighting, so every
/// output coordinate gets a distinct upstream gradient.
inline NodeId weighted_sum(BoundGraph& bg, NodeId x, std::size_t rows, std::size_t cols,
                           std::uint64_t seed) {
  Graph& g = bg.graph;
  NodeId w = bg.constant(random_matrix(rows, cols, seed ^ 0x9e37));
  return g.mean_over_axis(g.mean_over_axis(g.multiply(x, w), 0), 1);
}

inline std::vector<GradCase> op_grad_cases() {
  std::vector<GradCase> cases;
  auto add = [&](std::string name, auto fn) { cases.push_back({std::move(name), fn}); };

  add("matmul", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 4, s));
    NodeId b = bg.parameter("b", random_matrix(4, 2, s + 1));
    NodeId root = weighted_sum(bg, bg.graph.matmul(a, b), 3, 2, s);
    return std::pair{std::move(bg), root};
  });
  add("add", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 4, s));
    NodeId b = bg.parameter("b", random_matrix(3, 4, s + 1));
    NodeId root = weighted_sum(bg, bg.graph.add(a, b), 3, 4, s);
    return std::pair{std::move(bg), root};
  });
  add("add_broadcast", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 4, s));
    NodeId b = bg.parameter("b", random_matrix(1, 4, s + 1));
    NodeId root = weighted_sum(bg, bg.graph.add(a, b), 3, 4, s);
    return std::pair{std::move(bg), root};
  });
  add("multiply", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 4, s));
    NodeId b = bg.parameter("b", random_matrix(3, 4, s + 1));
    NodeId root = weighted_sum(bg, bg.graph.multiply(a, b), 3, 4, s);
    return std::pair{std::move(bg), root};
  });
  add("scale", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(2, 5, s));
    NodeId root = weighted_sum(bg, bg.graph.scale(a, -1.7), 2, 5, s);
    return std::pair{std::move(bg), root};
  });
  add("relu", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", kink_free_matrix(3, 4, s));
    NodeId root = weighted_sum(bg, bg.graph.relu(a), 3, 4, s);
    return std::pair{std::move(bg), root};
  });
  add("softmax_rows", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 5, s, -2.0, 2.0));
    NodeId root = weighted_sum(bg, bg.graph.softmax_rows(a), 3, 5, s);
    return std::pair{std::move(bg), root};
  });
  add("l2_normalize_rows", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", kink_free_matrix(3, 4, s));
    NodeId root = weighted_sum(bg, bg.graph.l2_normalize_rows(a), 3, 4, s);
    return std::pair{std::move(bg), root};
  });
  add("mean_over_axis", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(4, 3, s));
    Graph& g = bg.graph;
    NodeId m0 = weighted_sum(bg, g.mean_over_axis(a, 0), 1, 3, s);
    NodeId m1 = weighted_sum(bg, g.mean_over_axis(a, 1), 4, 1, s + 7);
    NodeId root = g.add(m0, m1);
    return std::pair{std::move(bg), root};
  });
  add("concat_rows", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(2, 3, s));
    NodeId b = bg.parameter("b", random_matrix(3, 3, s + 1));
    const NodeId parts[] = {a, b, a};
    NodeId root = weighted_sum(bg, bg.graph.concat_rows(parts), 7, 3, s);
    return std::pair{std::move(bg), root};
  });
  add("conv2d_valid", [](std::uint64_t s) {
    BoundGraph bg;
    const ImageGeometry geo{2, 5, 6};
    NodeId x = bg.parameter("x", random_matrix(2, geo.size(), s));
    NodeId k = bg.parameter("k", random_matrix(3, 2 * 3 * 2, s + 1));
    const ImageGeometry out = conv_output_geometry(geo, 3, 3, 2);
    NodeId root = weighted_sum(bg, bg.graph.conv2d_valid(x, k, geo, 3, 2), 2, out.size(), s);
    return std::pair{std::move(bg), root};
  });
  add("avgpool2x2", [](std::uint64_t s) {
    BoundGraph bg;
    const ImageGeometry geo{2, 5, 4};
    NodeId x = bg.parameter("x", random_matrix(3, geo.size(), s));
    NodeId root =
        weighted_sum(bg, bg.graph.avgpool2x2(x, geo), 3, pool_output_geometry(geo).size(), s);
    return std::pair{std::move(bg), root};
  });
  add("cross_entropy", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId z = bg.parameter("z", random_matrix(4, 5, s, -3.0, 3.0));
    Rng rng(s);
    std::vector<int> labels(4);
    for (int& l : labels) l = static_cast<int>(rng() % 5);
    NodeId root = bg.graph.cross_entropy(z, labels);
    return std::pair{std::move(bg), root};
  });
  add("transpose", [](std::uint64_t s) {
    BoundGraph bg;
    NodeId a = bg.parameter("a", random_matrix(3, 4, s));
    NodeId root = weighted_sum(bg, bg.graph.transpose(a), 4, 3, s);
    return std::pair{std::move(bg), root};
  });
  return cases;
}

/// Cosine-head cross-entropy with trainable features and prototypes.
inline std::pair<BoundGraph, NodeId> cosine_head_case(std::uint64_t s) {
  BoundGraph bg;
  NodeId f = bg.parameter("f", kink_free_matrix(6, 5, s));
  NodeId w = bg.parameter("w", kink_free_matrix(4, 5, s + 1));
  NodeId z = head_logits(bg, HeadKind::kCosine, f, w, std::nullopt, 16.0, 6, 4, 5);
  Rng rng(s);
  std::vector<int> labels(6);
  for (int& l : labels) l = static_cast<int>(rng() % 4);
  NodeId root = bg.graph.cross_entropy(z, labels);
  return {std::move(bg), root};
}

/// Adapter loss over a 3-node bank and 4 queries under the cosine head.
/// U is drawn at full scale so its gradient is not negligible.
inline std::pair<BoundGraph, NodeId> adapter_loss_case(std::uint64_t s,
                                                      AdapterConfig cfg = {5, 0, 1, false, 0.0, false}) {
  AdapterParams params = init_adapter(cfg, s);
  Rng rng(s + 3);
  for (auto& [name, t] : params.params) {
    if (name.find(".u.") != std::string::npos) t = uniform_tensor(t.shape(), -0.5, 0.5, rng);
  }
  ClassifierBank bank;
  ClassifierWeights h0{HeadKind::kCosine, kink_free_matrix(2, 5, s + 1), std::nullopt, 16.0, {0, 1}, 0};
  ClassifierWeights h1{HeadKind::kCosine, kink_free_matrix(1, 5, s + 2), std::nullopt, 16.0, {2}, 1};
  bank.heads = {h0, h1};
  const Tensor queries = kink_free_matrix(4, 5, s + 4);
  const std::vector<int> labels{0, 1, 2, static_cast<int>(s % 3)};
  AdaptLossGraph lg = adapt_loss_graph(params, bank, queries, labels);
  return {std::move(lg.bg), lg.loss};
}

}  // namespace cec::testing

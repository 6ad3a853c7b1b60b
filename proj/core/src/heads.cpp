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

#include "cec/heads.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/optim.hpp"
#include "cec/random.hpp"

namespace cec {

std::string_view head_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::kLinear: return "linear";
    case HeadKind::kCosine: return "cosine";
    case HeadKind::kNegL2: return "neg-l2";
  }
  return "unknown";
}

HeadKind parse_head_kind(std::string_view name) {
  if (name == "linear") return HeadKind::kLinear;
  if (name == "cosine") return HeadKind::kCosine;
  if (name == "neg-l2" || name == "l2") return HeadKind::kNegL2;
  throw std::invalid_argument(fmt::format("unknown head kind '{}'", name));
}

std::size_t ClassifierWeights::row_of(int class_id) const {
  auto it = std::find(class_ids.begin(), class_ids.end(), class_id);
  if (it == class_ids.end()) {
    throw std::out_of_range(fmt::format("class {} is not in this head", class_id));
  }
  return static_cast<std::size_t>(it - class_ids.begin());
}

ClassifierWeights init_from_data(const Tensor& embeddings, std::span<const int> labels,
                                 HeadKind kind, double scale) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return init_from_data(embeddings, labels, classes, kind, scale);
}

ClassifierWeights init_from_data(const Tensor& embeddings, std::span<const int> labels,
                                 std::span<const int> class_ids, HeadKind kind, double scale) {
  if (embeddings.rows() != labels.size()) {
    throw ShapeError(fmt::format("init_from_data: {} embeddings but {} labels", embeddings.rows(),
                                 labels.size()));
  }
  std::map<int, std::size_t> row;
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    if (!row.emplace(class_ids[i], i).second) {
      throw std::invalid_argument(fmt::format("init_from_data: duplicate class {}", class_ids[i]));
    }
  }
  const std::size_t dim = embeddings.cols();
  Tensor sums = Tensor::matrix(class_ids.size(), dim);
  std::vector<std::size_t> counts(class_ids.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = row.find(labels[i]);
    if (it == row.end()) {
      throw std::invalid_argument(fmt::format("init_from_data: label {} not in class list", labels[i]));
    }
    auto dst = sums.row_span(it->second);
    auto src = embeddings.row_span(i);
    for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
    ++counts[it->second];
  }
  for (std::size_t c = 0; c < class_ids.size(); ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument(fmt::format("init_from_data: class {} has no samples", class_ids[c]));
    }
    for (double& v : sums.row_span(c)) v /= static_cast<double>(counts[c]);
  }
  ClassifierWeights head;
  head.kind = kind;
  head.weights = std::move(sums);
  head.scale = scale;
  head.class_ids.assign(class_ids.begin(), class_ids.end());
  if (kind == HeadKind::kLinear) head.bias = Tensor::matrix(1, class_ids.size());
  return head;
}

ClassifierWeights init_random(std::span<const int> class_ids, std::size_t dim, HeadKind kind,
                              std::uint64_t seed, double scale) {
  Rng rng(seed);
  ClassifierWeights head;
  head.kind = kind;
  head.weights = glorot_uniform({class_ids.size(), dim}, dim, class_ids.size(), rng);
  head.scale = scale;
  head.class_ids.assign(class_ids.begin(), class_ids.end());
  if (kind == HeadKind::kLinear) head.bias = Tensor::matrix(1, class_ids.size());
  return head;
}

std::vector<double> score(const ClassifierWeights& head, std::span<const double> embedding) {
  if (embedding.size() != head.dim()) {
    throw ShapeError(fmt::format("score: embedding length {} but head dimension {}",
                                 embedding.size(), head.dim()));
  }
  const std::size_t n = head.num_classes();
  std::vector<double> logits(n);
  switch (head.kind) {
    case HeadKind::kLinear:
      for (std::size_t c = 0; c < n; ++c) {
        logits[c] = dot(head.weights.row_span(c), embedding) + (head.bias ? (*head.bias)[c] : 0.0);
      }
      break;
    case HeadKind::kCosine: {
      const double fn = l2_norm(embedding);
      for (std::size_t c = 0; c < n; ++c) {
        const double wn = l2_norm(head.weights.row_span(c));
        logits[c] = (fn == 0.0 || wn == 0.0)
                        ? 0.0
                        : head.scale * dot(head.weights.row_span(c), embedding) / (wn * fn);
      }
      break;
    }
    case HeadKind::kNegL2:
      for (std::size_t c = 0; c < n; ++c) {
        auto w = head.weights.row_span(c);
        double d2 = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) d2 += (w[k] - embedding[k]) * (w[k] - embedding[k]);
        logits[c] = -d2;
      }
      break;
  }
  return logits;
}

Tensor score_batch(const ClassifierWeights& head, const Tensor& embeddings) {
  Tensor out = Tensor::matrix(embeddings.rows(), head.num_classes());
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    const std::vector<double> row = score(head, embeddings.row_span(i));
    std::copy(row.begin(), row.end(), out.row_span(i).begin());
  }
  return out;
}

NodeId head_logits(BoundGraph& bg, HeadKind kind, NodeId features, NodeId weights,
                   std::optional<NodeId> bias, double scale, std::size_t num_queries,
                   std::size_t num_classes, std::size_t dim) {
  Graph& g = bg.graph;
  switch (kind) {
    case HeadKind::kLinear: {
      NodeId z = g.matmul(features, g.transpose(weights));
      return bias ? g.add(z, *bias) : z;
    }
    case HeadKind::kCosine: {
      NodeId f = g.l2_normalize_rows(features);
      NodeId w = g.l2_normalize_rows(weights);
      return g.scale(g.matmul(f, g.transpose(w)), scale);
    }
    case HeadKind::kNegL2: {
      // -|w - f|^2 = 2 f.w - |w|^2 - |f|^2, each term expanded to [Q, M].
      NodeId ones_dim = bg.constant(Tensor::matrix(dim, 1, 1.0));
      NodeId cross = g.scale(g.matmul(features, g.transpose(weights)), 2.0);
      NodeId w_sq = g.transpose(g.matmul(g.multiply(weights, weights), ones_dim));  // [1, M]
      NodeId w_term = g.matmul(bg.constant(Tensor::matrix(num_queries, 1, 1.0)), w_sq);
      NodeId f_sq = g.matmul(g.multiply(features, features), ones_dim);  // [Q, 1]
      NodeId f_term = g.matmul(f_sq, bg.constant(Tensor::matrix(1, num_classes, 1.0)));
      return g.add(cross, g.scale(g.add(w_term, f_term), -1.0));
    }
  }
  throw std::logic_error("unhandled head kind");
}

std::vector<int> label_columns(const ClassifierWeights& head, std::span<const int> labels) {
  std::map<int, int> col;
  for (std::size_t i = 0; i < head.class_ids.size(); ++i) col.emplace(head.class_ids[i], static_cast<int>(i));
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto it = col.find(l);
    if (it == col.end()) throw std::invalid_argument(fmt::format("label {} is not a class of this head", l));
    out.push_back(it->second);
  }
  return out;
}

namespace {

struct HeadGraph {
  BoundGraph bg;
  NodeId loss;
};

HeadGraph build_head_loss(const ClassifierWeights& head, const Tensor& embeddings,
                          std::vector<int> columns, bool trainable) {
  HeadGraph hg;
  BoundGraph& bg = hg.bg;
  NodeId f = bg.constant("features", embeddings);
  NodeId w = trainable ? bg.parameter("weights", head.weights) : bg.constant("weights", head.weights);
  std::optional<NodeId> b;
  if (head.kind == HeadKind::kLinear && head.bias) {
    b = trainable ? bg.parameter("bias", *head.bias) : bg.constant("bias", *head.bias);
  }
  NodeId z = head_logits(bg, head.kind, f, w, b, head.scale, embeddings.rows(), head.num_classes(),
                         head.dim());
  hg.loss = bg.graph.cross_entropy(z, std::move(columns));
  return hg;
}

}  // namespace

double head_loss(const ClassifierWeights& head, const Tensor& embeddings,
                 std::span<const int> labels) {
  HeadGraph hg = build_head_loss(head, embeddings, label_columns(head, labels), false);
  return hg.bg.forward(hg.loss).item();
}

ClassifierWeights fit_head(const ClassifierWeights& init, const Tensor& embeddings,
                           std::span<const int> labels, std::size_t epochs, double lr,
                           std::uint64_t seed, std::size_t batch_size) {
  if (!(lr > 0.0)) throw std::invalid_argument("fit_head: learning rate must be positive");
  if (embeddings.rows() != labels.size()) {
    throw ShapeError("fit_head: embeddings and labels differ in count");
  }
  const std::vector<int> columns = label_columns(init, labels);
  ClassifierWeights head = init;
  if (epochs == 0) return head;

  ParamSet params{{"weights", head.weights}};
  if (head.kind == HeadKind::kLinear && head.bias) params.emplace("bias", *head.bias);
  SgdState opt = make_sgd_state(params, lr, 0.9);

  const std::size_t n = embeddings.rows();
  const std::size_t bs = batch_size == 0 ? n : std::min(batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    if (bs < n) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(start + bs, n);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<int> cols;
      for (std::size_t i : idx) cols.push_back(columns[i]);
      head.weights = params.at("weights");
      if (head.bias) head.bias = params.at("bias");
      HeadGraph hg = build_head_loss(head, bs < n ? select_rows(embeddings, idx) : embeddings,
                                     std::move(cols), true);
      const BackwardResult res = hg.bg.backward(hg.loss);
      auto step = sgd_step(params, hg.bg.named_grads(res), opt);
      params = std::move(step.params);
      opt = std::move(step.state);
    }
  }
  head.weights = params.at("weights");
  if (head.bias) head.bias = params.at("bias");
  return head;
}

ClassifierWeights concatenate_heads(std::span<const ClassifierWeights> heads) {
  if (heads.empty()) throw std::invalid_argument("concatenate_heads: no heads");
  ClassifierWeights out;
  out.kind = heads.front().kind;
  out.scale = heads.front().scale;
  out.session = heads.back().session;
  std::vector<Tensor> rows, biases;
  for (const ClassifierWeights& h : heads) {
    if (h.kind != out.kind) throw std::invalid_argument("concatenate_heads: mixed head kinds");
    rows.push_back(h.weights);
    out.class_ids.insert(out.class_ids.end(), h.class_ids.begin(), h.class_ids.end());
    if (out.kind == HeadKind::kLinear) {
      biases.push_back(h.bias ? *h.bias : Tensor::matrix(1, h.num_classes()));
    }
  }
  out.weights = concat_rows(rows);
  if (out.kind == HeadKind::kLinear) {
    std::vector<double> b;
    for (const Tensor& t : biases) b.insert(b.end(), t.values().begin(), t.values().end());
    const std::size_t n = b.size();
    out.bias = Tensor({1, n}, std::move(b));
  }
  return out;
}

ParamDocument head_to_document(const ClassifierWeights& head) {
  ParamDocument doc;
  doc.meta = {{"kind", std::string(head_name(head.kind))},
              {"scale", head.scale},
              {"class_ids", head.class_ids},
              {"session", head.session}};
  doc.params.emplace("weights", head.weights);
  if (head.bias) doc.params.emplace("bias", *head.bias);
  return doc;
}

ClassifierWeights head_from_document(const ParamDocument& doc) {
  ClassifierWeights head;
  head.kind = parse_head_kind(doc.meta.at("kind").get<std::string>());
  head.scale = doc.meta.at("scale").get<double>();
  head.class_ids = doc.meta.at("class_ids").get<std::vector<int>>();
  head.session = doc.meta.value("session", std::size_t{0});
  head.weights = doc.params.at("weights");
  if (auto it = doc.params.find("bias"); it != doc.params.end()) head.bias = it->second;
  if (head.weights.rows() != head.class_ids.size()) {
    throw FormatError("head checkpoint: weight rows do not match the class-id list");
  }
  return head;
}

}  // namespace cec

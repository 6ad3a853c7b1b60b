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

#include "cec/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/random.hpp"

namespace cec {

void ClassifierBank::validate() const {
  if (heads.empty()) throw std::invalid_argument("classifier bank is empty");
  std::set<int> seen;
  for (const ClassifierWeights& h : heads) {
    if (h.kind != heads.front().kind) throw std::invalid_argument("classifier bank mixes head kinds");
    if (h.dim() != heads.front().dim()) {
      throw ShapeError(fmt::format("classifier bank mixes dimensions {} and {}", h.dim(),
                                   heads.front().dim()));
    }
    if (h.weights.rows() != h.class_ids.size()) {
      throw ShapeError("classifier head row count differs from its class count");
    }
    for (int c : h.class_ids) {
      if (!seen.insert(c).second) {
        throw std::invalid_argument(fmt::format("class id {} appears twice in the bank", c));
      }
    }
  }
}

std::size_t ClassifierBank::rows() const {
  std::size_t n = 0;
  for (const ClassifierWeights& h : heads) n += h.num_classes();
  return n;
}

std::size_t ClassifierBank::dim() const { return heads.at(0).dim(); }
HeadKind ClassifierBank::kind() const { return heads.at(0).kind; }

Tensor ClassifierBank::stacked() const {
  std::vector<Tensor> parts;
  for (const ClassifierWeights& h : heads) parts.push_back(h.weights);
  return concat_rows(parts);
}

std::vector<int> ClassifierBank::class_ids() const {
  std::vector<int> ids;
  for (const ClassifierWeights& h : heads) ids.insert(ids.end(), h.class_ids.begin(), h.class_ids.end());
  return ids;
}

ClassifierBank ClassifierBank::with_rows(const Tensor& rows) const {
  if (rows.rows() != this->rows() || rows.cols() != dim()) {
    throw ShapeError(fmt::format("with_rows: expected {}x{}, got {}", this->rows(), dim(),
                                 shape_to_string(rows.shape())));
  }
  ClassifierBank out = *this;
  std::size_t offset = 0;
  for (ClassifierWeights& h : out.heads) {
    std::vector<std::size_t> idx(h.num_classes());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = offset + i;
    h.weights = select_rows(rows, idx);
    offset += idx.size();
  }
  return out;
}

ClassifierWeights ClassifierBank::concatenated() const { return concatenate_heads(heads); }

void to_json(nlohmann::json& j, const AdapterConfig& c) {
  j = {{"embedding_dim", c.embedding_dim}, {"projection_dim", c.projection_dim},
       {"heads", c.heads},                 {"layer_norm", c.layer_norm},
       {"dropout", c.dropout},             {"query_node", c.query_node}};
}

void from_json(const nlohmann::json& j, AdapterConfig& c) {
  AdapterConfig d;
  c.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  c.projection_dim = j.value("projection_dim", d.projection_dim);
  c.heads = j.value("heads", d.heads);
  c.layer_norm = j.value("layer_norm", d.layer_norm);
  c.dropout = j.value("dropout", d.dropout);
  c.query_node = j.value("query_node", d.query_node);
}

namespace {

std::string phi_name(std::size_t h) { return fmt::format("adapter.phi.{}", h); }
std::string theta_name(std::size_t h) { return fmt::format("adapter.theta.{}", h); }
std::string u_name(std::size_t h) { return fmt::format("adapter.u.{}", h); }
constexpr const char* kGain = "adapter.ln.gain";
constexpr const char* kBias = "adapter.ln.bias";

void check_config(const AdapterConfig& c) {
  if (c.embedding_dim == 0) throw std::invalid_argument("adapter: embedding_dim must be positive");
  if (c.heads == 0) throw std::invalid_argument("adapter: need at least one attention head");
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw std::invalid_argument("adapter: dropout must lie in [0, 1)");
}

}  // namespace

const Tensor& AdapterParams::phi(std::size_t h) const { return params.at(phi_name(h)); }
const Tensor& AdapterParams::theta(std::size_t h) const { return params.at(theta_name(h)); }
const Tensor& AdapterParams::u(std::size_t h) const { return params.at(u_name(h)); }

AdapterParams init_adapter(const AdapterConfig& config, std::uint64_t seed) {
  check_config(config);
  Rng rng(seed);
  const std::size_t c = config.embedding_dim, d = config.d();
  AdapterParams p;
  p.config = config;
  for (std::size_t h = 0; h < config.heads; ++h) {
    p.params.emplace(phi_name(h), glorot_uniform({c, d}, c, d, rng));
    p.params.emplace(theta_name(h), glorot_uniform({c, d}, c, d, rng));
    p.params.emplace(u_name(h), uniform_tensor({c, c}, -1e-3, 1e-3, rng));
  }
  if (config.layer_norm) {
    p.params.emplace(kGain, Tensor::matrix(1, c, 1.0));
    p.params.emplace(kBias, Tensor::matrix(1, c));
  }
  return p;
}

ParamDocument adapter_to_document(const AdapterParams& params) {
  ParamDocument doc;
  doc.meta = {{"kind", "adapter"}, {"config", params.config}};
  doc.params = params.params;
  return doc;
}

AdapterParams adapter_from_document(const ParamDocument& doc) {
  if (doc.meta.value("kind", std::string()) != "adapter") {
    throw FormatError("checkpoint is not an adapter");
  }
  AdapterParams p;
  p.config = doc.meta.at("config").get<AdapterConfig>();
  p.params = doc.params;
  const AdapterParams fresh = init_adapter(p.config, 0);
  for (const auto& [name, t] : fresh.params) {
    auto it = p.params.find(name);
    if (it == p.params.end() || it->second.shape() != t.shape()) {
      throw FormatError(fmt::format("adapter checkpoint: tensor '{}' missing or misshapen", name));
    }
  }
  if (p.params.size() != fresh.params.size()) {
    throw FormatError("adapter checkpoint: unexpected extra tensors");
  }
  return p;
}

Tensor relation_coefficients(const AdapterParams& params, const Tensor& rows, std::size_t head) {
  if (rows.cols() != params.config.embedding_dim) {
    throw ShapeError(fmt::format("relation_coefficients: rows have {} columns, adapter expects {}",
                                 rows.cols(), params.config.embedding_dim));
  }
  return matmul(matmul(rows, params.phi(head)), transpose(matmul(rows, params.theta(head))));
}

Tensor relation_coefficients(const AdapterParams& params, const ClassifierBank& bank,
                             std::size_t head) {
  bank.validate();
  return relation_coefficients(params, bank.stacked(), head);
}

Tensor attention_normalize(const Tensor& e) {
  Tensor a = e;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return a;
}

NodeId build_adapt(BoundGraph& bg, const AdapterParams& params, NodeId rows, std::size_t m,
                   const AdaptMode& mode, bool trainable) {
  const AdapterConfig& cfg = params.config;
  check_config(cfg);
  const std::size_t c = cfg.embedding_dim;
  // Adapter leaves are shared by every pass added to the same graph.
  auto leaf = [&](const std::string& name) {
    if (auto it = bg.named.find(name); it != bg.named.end()) return it->second;
    const Tensor& t = params.params.at(name);
    return trainable ? bg.parameter(name, t) : bg.constant(name, t);
  };
  Graph& g = bg.graph;

  std::optional<NodeId> message;
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    NodeId p = g.matmul(rows, leaf(phi_name(h)));
    NodeId q = g.matmul(rows, leaf(theta_name(h)));
    NodeId a = g.softmax_rows(g.matmul(p, g.transpose(q)));
    NodeId v = g.matmul(rows, g.transpose(leaf(u_name(h))));
    NodeId msg = g.matmul(a, v);
    message = message ? g.add(*message, msg) : msg;
  }
  if (cfg.heads > 1) message = g.scale(*message, 1.0 / static_cast<double>(cfg.heads));

  if (mode.training && cfg.dropout > 0.0) {
    Rng rng(mode.dropout_seed);
    std::bernoulli_distribution keep(1.0 - cfg.dropout);
    Tensor mask = Tensor::matrix(m, c);
    for (double& v : mask.values()) v = keep(rng) ? 1.0 / (1.0 - cfg.dropout) : 0.0;
    message = g.multiply(*message, bg.constant(std::move(mask)));
  }

  NodeId out = g.add(rows, *message);
  if (cfg.layer_norm) {
    // sqrt(C) * unit(x - mean(x)) is x standardized by its population std.
    NodeId mean = g.matmul(g.mean_over_axis(out, 1), bg.constant(Tensor::matrix(1, c, 1.0)));
    NodeId centered = g.add(out, g.scale(mean, -1.0));
    NodeId normed = g.scale(g.l2_normalize_rows(centered), std::sqrt(static_cast<double>(c)));
    NodeId gain = g.matmul(bg.constant(Tensor::matrix(m, 1, 1.0)), leaf(kGain));
    out = g.add(g.multiply(normed, gain), leaf(kBias));
  }
  return out;
}

ClassifierBank adapt(const AdapterParams& params, const ClassifierBank& bank, const AdaptMode& mode) {
  bank.validate();
  if (bank.dim() != params.config.embedding_dim) {
    throw ShapeError(fmt::format("adapt: bank dimension {} but adapter dimension {}", bank.dim(),
                                 params.config.embedding_dim));
  }
  BoundGraph bg;
  NodeId rows = bg.constant("bank", bank.stacked());
  NodeId out = build_adapt(bg, params, rows, bank.rows(), mode, false);
  return bank.with_rows(bg.forward(out));
}

ClassifierBank adapt_with_query(const AdapterParams& params, const ClassifierBank& bank,
                                std::span<const double> query, const AdaptMode& mode) {
  bank.validate();
  if (query.size() != bank.dim()) throw ShapeError("adapt_with_query: query length mismatch");
  const std::size_t m = bank.rows();
  const Tensor nodes = concat_rows(std::vector<Tensor>{bank.stacked(), Tensor::row(query)});
  BoundGraph bg;
  NodeId rows = bg.constant("bank", nodes);
  NodeId out = build_adapt(bg, params, rows, m + 1, mode, false);
  const Tensor& adapted = bg.forward(out);
  std::vector<std::size_t> keep(m);
  for (std::size_t i = 0; i < m; ++i) keep[i] = i;
  return bank.with_rows(select_rows(adapted, keep));
}

NodeId build_adapt_loss(BoundGraph& bg, const AdapterParams& params, const ClassifierBank& bank,
                        NodeId queries, std::size_t num_queries, std::span<const int> labels,
                        const AdaptMode& mode, bool trainable, NodeId* logits_out) {
  bank.validate();
  if (labels.size() != num_queries) {
    throw ShapeError(fmt::format("adapt loss: {} queries but {} labels", num_queries, labels.size()));
  }
  const ClassifierWeights flat = bank.concatenated();
  std::vector<int> columns = label_columns(flat, labels);
  const std::size_t m = flat.num_classes(), c = flat.dim();
  Graph& g = bg.graph;
  std::optional<NodeId> bias;
  if (flat.bias) bias = bg.constant(*flat.bias);
  NodeId bank_rows = bg.constant(flat.weights);

  NodeId logits;
  if (!params.config.query_node) {
    NodeId adapted = build_adapt(bg, params, bank_rows, m, mode, trainable);
    logits = head_logits(bg, flat.kind, queries, adapted, bias, flat.scale, num_queries, m, c);
  } else {
    Tensor keep = Tensor::matrix(m, m + 1);
    for (std::size_t i = 0; i < m; ++i) keep(i, i) = 1.0;
    NodeId keep_node = bg.constant(std::move(keep));
    std::vector<NodeId> rows;
    for (std::size_t q = 0; q < num_queries; ++q) {
      Tensor pick = Tensor::matrix(1, num_queries);
      pick(0, q) = 1.0;
      NodeId f = g.matmul(bg.constant(std::move(pick)), queries);
      const NodeId parts[] = {bank_rows, f};
      AdaptMode sub = mode;
      sub.dropout_seed = derive_seed(mode.dropout_seed, q);
      NodeId adapted = g.matmul(keep_node, build_adapt(bg, params, g.concat_rows(parts), m + 1, sub, trainable));
      rows.push_back(head_logits(bg, flat.kind, f, adapted, bias, flat.scale, 1, m, c));
    }
    logits = g.concat_rows(rows);
  }
  if (logits_out) *logits_out = logits;
  return g.cross_entropy(logits, std::move(columns));
}

AdaptLossGraph adapt_loss_graph(const AdapterParams& params, const ClassifierBank& bank,
                                const Tensor& query_embeddings, std::span<const int> labels,
                                const AdaptMode& mode) {
  AdaptLossGraph out;
  NodeId q = out.bg.constant("queries", query_embeddings);
  out.loss = build_adapt_loss(out.bg, params, bank, q, query_embeddings.rows(), labels, mode, true,
                              &out.logits);
  return out;
}

}  // namespace cec

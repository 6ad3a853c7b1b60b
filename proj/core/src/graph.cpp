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

#include "cec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMultiply: return "multiply";
    case OpKind::kScale: return "scale";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftmaxRows: return "softmax-rows";
    case OpKind::kL2NormalizeRows: return "l2-normalize-rows";
    case OpKind::kMeanOverAxis: return "mean-over-axis";
    case OpKind::kConcatRows: return "concat-rows";
    case OpKind::kConv2dValid: return "conv2d-valid";
    case OpKind::kAvgPool2x2: return "avgpool2x2";
    case OpKind::kCrossEntropy: return "cross-entropy";
    case OpKind::kTranspose: return "transpose";
  }
  return "unknown";
}

ImageGeometry conv_output_geometry(const ImageGeometry& in, std::size_t out_channels,
                                   std::size_t kh, std::size_t kw) {
  if (kh == 0 || kw == 0 || kh > in.height || kw > in.width) {
    throw ShapeError(fmt::format("conv2d: kernel {}x{} does not fit input {}x{}", kh, kw,
                                 in.height, in.width));
  }
  return {out_channels, in.height - kh + 1, in.width - kw + 1};
}

ImageGeometry pool_output_geometry(const ImageGeometry& in) {
  if (in.height < 2 || in.width < 2) {
    throw ShapeError(fmt::format("avgpool2x2: input {}x{} too small", in.height, in.width));
  }
  return {in.channels, in.height / 2, in.width / 2};
}

// ---------------------------------------------------------------------------
// Construction

NodeId Graph::push(Node node) {
  for (NodeId in : node.inputs) {
    if (in.index >= nodes_.size()) throw std::out_of_range("graph input refers to a later node");
  }
  nodes_.push_back(std::move(node));
  values_.emplace_back();
  evaluated_.push_back(false);
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Graph::parameter(std::string name) {
  Node n;
  n.trainable = true;
  n.name = std::move(name);
  return push(std::move(n));
}

NodeId Graph::constant(std::string name) {
  Node n;
  n.name = std::move(name);
  return push(std::move(n));
}

namespace {

Node make_op(OpKind op, std::vector<NodeId> inputs) {
  Node n;
  n.op = op;
  n.inputs = std::move(inputs);
  return n;
}

}  // namespace

NodeId Graph::matmul(NodeId a, NodeId b) { return push(make_op(OpKind::kMatmul, {a, b})); }
NodeId Graph::add(NodeId a, NodeId b) { return push(make_op(OpKind::kAdd, {a, b})); }
NodeId Graph::multiply(NodeId a, NodeId b) { return push(make_op(OpKind::kMultiply, {a, b})); }

NodeId Graph::scale(NodeId a, double factor) {
  Node n = make_op(OpKind::kScale, {a});
  n.params.scalar = factor;
  return push(std::move(n));
}

NodeId Graph::relu(NodeId a) { return push(make_op(OpKind::kRelu, {a})); }
NodeId Graph::softmax_rows(NodeId a) { return push(make_op(OpKind::kSoftmaxRows, {a})); }
NodeId Graph::l2_normalize_rows(NodeId a) {
  return push(make_op(OpKind::kL2NormalizeRows, {a}));
}

NodeId Graph::mean_over_axis(NodeId a, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("mean_over_axis: axis must be 0 or 1");
  Node n = make_op(OpKind::kMeanOverAxis, {a});
  n.params.axis = axis;
  return push(std::move(n));
}

NodeId Graph::concat_rows(std::span<const NodeId> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  return push(make_op(OpKind::kConcatRows, {parts.begin(), parts.end()}));
}

NodeId Graph::conv2d_valid(NodeId input, NodeId kernel, ImageGeometry geometry, std::size_t kh,
                           std::size_t kw) {
  Node n = make_op(OpKind::kConv2dValid, {input, kernel});
  n.params.geometry = geometry;
  n.params.kernel_h = kh;
  n.params.kernel_w = kw;
  return push(std::move(n));
}

NodeId Graph::avgpool2x2(NodeId input, ImageGeometry geometry) {
  Node n = make_op(OpKind::kAvgPool2x2, {input});
  n.params.geometry = geometry;
  return push(std::move(n));
}

NodeId Graph::cross_entropy(NodeId logits, std::vector<int> labels) {
  Node n = make_op(OpKind::kCrossEntropy, {logits});
  n.params.labels = std::move(labels);
  return push(std::move(n));
}

NodeId Graph::transpose(NodeId a) { return push(make_op(OpKind::kTranspose, {a})); }

const Node& Graph::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw std::out_of_range("node id out of range");
  return nodes_[id.index];
}

NodeId Graph::last() const {
  if (nodes_.empty()) throw std::logic_error("empty graph");
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::vector<NodeId> Graph::trainable_leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].op && nodes_[i].trainable) out.push_back(NodeId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

std::vector<NodeId> Graph::nodes_of(OpKind op) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == op) out.push_back(NodeId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

std::string Graph::describe(std::size_t i) const {
  const Node& n = nodes_[i];
  if (!n.op) return fmt::format("node #{} (leaf '{}')", i, n.name);
  return fmt::format("node #{} ({})", i, op_name(*n.op));
}

std::vector<bool> Graph::reachable_from(NodeId root) const {
  if (root.index >= nodes_.size()) throw std::out_of_range("root node out of range");
  std::vector<bool> mark(nodes_.size(), false);
  mark[root.index] = true;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (!mark[i]) continue;
    for (NodeId in : nodes_[i].inputs) mark[in.index] = true;
  }
  return mark;
}

const Tensor& Graph::value(NodeId id) const {
  if (id.index >= nodes_.size() || !evaluated_[id.index]) {
    throw std::logic_error("value(): node has not been evaluated");
  }
  return values_[id.index];
}

// ---------------------------------------------------------------------------
// Forward

namespace {

void require_matrix(const Tensor& t, const std::string& where) {
  if (t.rank() != 2) {
    throw ShapeError(fmt::format("{}: expected a matrix, got {}", where, shape_to_string(t.shape())));
  }
}

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  return a.rank() == 2 && b.rank() == 2 && b.rows() == 1 && a.cols() == b.cols() && a.rows() > 1;
}

Tensor softmax_rows_value(const Tensor& x) {
  Tensor y = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = y.row_span(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double& v : row) {
      v = std::exp(v - m);
      s += v;
    }
    for (double& v : row) v /= s;
  }
  return y;
}

Tensor l2_normalize_rows_value(const Tensor& x) {
  Tensor y = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = y.row_span(r);
    const double n = l2_norm(row);
    if (n == 0.0) continue;
    for (double& v : row) v /= n;
  }
  return y;
}

}  // namespace

Tensor Graph::eval_node(std::size_t i, const Bindings& bindings) const {
  const Node& n = nodes_[i];
  const std::string where = describe(i);
  if (!n.op) {
    auto it = bindings.find(NodeId{static_cast<std::uint32_t>(i)});
    if (it == bindings.end()) throw std::invalid_argument(where + ": leaf is not bound");
    return it->second;
  }
  auto in = [&](std::size_t k) -> const Tensor& { return values_[n.inputs[k].index]; };

  switch (*n.op) {
    case OpKind::kMatmul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      require_matrix(a, where);
      require_matrix(b, where);
      if (a.cols() != b.rows()) {
        throw ShapeError(fmt::format("{}: cannot multiply {} by {}", where,
                                     shape_to_string(a.shape()), shape_to_string(b.shape())));
      }
      return cec::matmul(a, b);
    }
    case OpKind::kAdd: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.shape() == b.shape()) {
        Tensor out = a;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
        return out;
      }
      if (is_row_broadcast(a, b)) {
        Tensor out = a;
        const std::size_t d = a.cols();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k % d];
        return out;
      }
      throw ShapeError(fmt::format("{}: cannot add {} and {}", where, shape_to_string(a.shape()),
                                   shape_to_string(b.shape())));
    }
    case OpKind::kMultiply: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.shape() != b.shape()) {
        throw ShapeError(fmt::format("{}: elementwise shapes differ {} vs {}", where,
                                     shape_to_string(a.shape()), shape_to_string(b.shape())));
      }
      Tensor out = a;
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b[k];
      return out;
    }
    case OpKind::kScale: {
      Tensor out = in(0);
      for (double& v : out.values()) v *= n.params.scalar;
      return out;
    }
    case OpKind::kRelu: {
      Tensor out = in(0);
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      return out;
    }
    case OpKind::kSoftmaxRows:
      require_matrix(in(0), where);
      return softmax_rows_value(in(0));
    case OpKind::kL2NormalizeRows:
      require_matrix(in(0), where);
      return l2_normalize_rows_value(in(0));
    case OpKind::kMeanOverAxis: {
      const Tensor& x = in(0);
      require_matrix(x, where);
      if (n.params.axis == 0) {
        Tensor out = Tensor::matrix(1, x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) out[c] += x(r, c);
        }
        for (double& v : out.values()) v /= static_cast<double>(x.rows());
        return out;
      }
      Tensor out = Tensor::matrix(x.rows(), 1);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += x(r, c);
        out[r] = s / static_cast<double>(x.cols());
      }
      return out;
    }
    case OpKind::kConcatRows: {
      std::vector<Tensor> parts;
      parts.reserve(n.inputs.size());
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        require_matrix(in(k), where);
        parts.push_back(in(k));
      }
      try {
        return cec::concat_rows(parts);
      } catch (const ShapeError& e) {
        throw ShapeError(where + ": " + e.what());
      }
    }
    case OpKind::kConv2dValid: {
      const Tensor& x = in(0);
      const Tensor& k = in(1);
      require_matrix(x, where);
      require_matrix(k, where);
      const ImageGeometry& g = n.params.geometry;
      const std::size_t kh = n.params.kernel_h, kw = n.params.kernel_w;
      if (x.cols() != g.size()) {
        throw ShapeError(fmt::format("{}: input has {} columns, geometry needs {}", where, x.cols(),
                                     g.size()));
      }
      if (k.cols() != g.channels * kh * kw) {
        throw ShapeError(fmt::format("{}: kernel has {} columns, expected {}", where, k.cols(),
                                     g.channels * kh * kw));
      }
      const ImageGeometry og = conv_output_geometry(g, k.rows(), kh, kw);
      Tensor out = Tensor::matrix(x.rows(), og.size());
      const std::size_t plane = g.height * g.width;
      for (std::size_t b = 0; b < x.rows(); ++b) {
        const double* xb = &x.values()[b * g.size()];
        double* ob = &out.values()[b * og.size()];
        for (std::size_t o = 0; o < og.channels; ++o) {
          const double* ko = &k.values()[o * k.cols()];
          double* oo = ob + o * og.height * og.width;
          for (std::size_t c = 0; c < g.channels; ++c) {
            const double* xc = xb + c * plane;
            for (std::size_t u = 0; u < kh; ++u) {
              for (std::size_t v = 0; v < kw; ++v) {
                const double w = ko[(c * kh + u) * kw + v];
                for (std::size_t r = 0; r < og.height; ++r) {
                  const double* xr = xc + (r + u) * g.width + v;
                  double* orow = oo + r * og.width;
                  for (std::size_t s = 0; s < og.width; ++s) orow[s] += w * xr[s];
                }
              }
            }
          }
        }
      }
      return out;
    }
    case OpKind::kAvgPool2x2: {
      const Tensor& x = in(0);
      require_matrix(x, where);
      const ImageGeometry& g = n.params.geometry;
      if (x.cols() != g.size()) {
        throw ShapeError(fmt::format("{}: input has {} columns, geometry needs {}", where, x.cols(),
                                     g.size()));
      }
      const ImageGeometry og = pool_output_geometry(g);
      Tensor out = Tensor::matrix(x.rows(), og.size());
      for (std::size_t b = 0; b < x.rows(); ++b) {
        for (std::size_t c = 0; c < g.channels; ++c) {
          const double* xc = &x.values()[b * g.size() + c * g.height * g.width];
          double* oc = &out.values()[b * og.size() + c * og.height * og.width];
          for (std::size_t r = 0; r < og.height; ++r) {
            for (std::size_t s = 0; s < og.width; ++s) {
              const double* p = xc + 2 * r * g.width + 2 * s;
              oc[r * og.width + s] = 0.25 * (p[0] + p[1] + p[g.width] + p[g.width + 1]);
            }
          }
        }
      }
      return out;
    }
    case OpKind::kCrossEntropy: {
      const Tensor& z = in(0);
      require_matrix(z, where);
      const auto& labels = n.params.labels;
      if (labels.size() != z.rows()) {
        throw ShapeError(fmt::format("{}: {} labels for {} rows", where, labels.size(), z.rows()));
      }
      double total = 0.0;
      for (std::size_t r = 0; r < z.rows(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= z.cols()) {
          throw std::out_of_range(fmt::format("{}: label {} outside [0, {})", where, labels[r],
                                              z.cols()));
        }
        auto row = z.row_span(r);
        const double m = *std::max_element(row.begin(), row.end());
        double s = 0.0;
        for (double v : row) s += std::exp(v - m);
        total += m + std::log(s) - row[labels[r]];
      }
      return Tensor::scalar(total / static_cast<double>(z.rows()));
    }
    case OpKind::kTranspose:
      require_matrix(in(0), where);
      return cec::transpose(in(0));
  }
  throw std::logic_error("unhandled op kind");
}

const Tensor& Graph::forward(const Bindings& bindings, NodeId root) {
  const std::vector<bool> mark = reachable_from(root);
  std::fill(evaluated_.begin(), evaluated_.end(), false);
  for (std::size_t i = 0; i <= root.index; ++i) {
    if (!mark[i]) continue;
    values_[i] = eval_node(i, bindings);
    if (!values_[i].all_finite()) {
      throw NonFiniteError(describe(i) + ": produced a non-finite value");
    }
    evaluated_[i] = true;
  }
  return values_[root.index];
}

// ---------------------------------------------------------------------------
// Backward

void Graph::backprop_node(std::size_t i, const Tensor& g, std::vector<Tensor>& grads,
                          std::vector<bool>& has_grad) const {
  const Node& n = nodes_[i];
  auto in = [&](std::size_t k) -> const Tensor& { return values_[n.inputs[k].index]; };
  auto accumulate = [&](std::size_t k, Tensor delta) {
    const std::size_t idx = n.inputs[k].index;
    if (!has_grad[idx]) {
      grads[idx] = std::move(delta);
      has_grad[idx] = true;
      return;
    }
    Tensor& acc = grads[idx];
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += delta[p];
  };
  const Tensor& y = values_[i];

  switch (*n.op) {
    case OpKind::kMatmul:
      accumulate(0, cec::matmul(g, cec::transpose(in(1))));
      accumulate(1, cec::matmul(cec::transpose(in(0)), g));
      return;
    case OpKind::kAdd: {
      accumulate(0, g);
      if (in(0).shape() == in(1).shape()) {
        accumulate(1, g);
      } else {
        Tensor gb = Tensor::matrix(1, g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
        }
        accumulate(1, std::move(gb));
      }
      return;
    }
    case OpKind::kMultiply: {
      Tensor ga = g, gb = g;
      for (std::size_t p = 0; p < g.size(); ++p) {
        ga[p] *= in(1)[p];
        gb[p] *= in(0)[p];
      }
      accumulate(0, std::move(ga));
      accumulate(1, std::move(gb));
      return;
    }
    case OpKind::kScale: {
      Tensor ga = g;
      for (double& v : ga.values()) v *= n.params.scalar;
      accumulate(0, std::move(ga));
      return;
    }
    case OpKind::kRelu: {
      Tensor ga = g;
      const Tensor& x = in(0);
      for (std::size_t p = 0; p < ga.size(); ++p) {
        if (!(x[p] > 0.0)) ga[p] = 0.0;
      }
      accumulate(0, std::move(ga));
      return;
    }
    case OpKind::kSoftmaxRows: {
      Tensor ga = g;
      for (std::size_t r = 0; r < y.rows(); ++r) {
        const double s = dot(g.row_span(r), y.row_span(r));
        auto out = ga.row_span(r);
        auto yr = y.row_span(r);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = yr[c] * (out[c] - s);
      }
      accumulate(0, std::move(ga));
      return;
    }
    case OpKind::kL2NormalizeRows: {
      const Tensor& x = in(0);
      Tensor ga = Tensor::matrix(x.rows(), x.cols());
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double norm = l2_norm(x.row_span(r));
        if (norm == 0.0) continue;  // zero row: zero gradient
        const double s = dot(g.row_span(r), y.row_span(r));
        auto out = ga.row_span(r);
        auto yr = y.row_span(r);
        auto gr = g.row_span(r);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = (gr[c] - yr[c] * s) / norm;
      }
      accumulate(0, std::move(ga));
      return;
    }
    case OpKind::kMeanOverAxis: {
      const Tensor& x = in(0);
      Tensor ga = Tensor::matrix(x.rows(), x.cols());
      if (n.params.axis == 0) {
        const double inv = 1.0 / static_cast<double>(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) ga(r, c) = g[c] * inv;
        }
      } else {
        const double inv = 1.0 / static_cast<double>(x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) ga(r, c) = g[r] * inv;
        }
      }
      accumulate(0, std::move(ga));
      return;
    }
    case OpKind::kConcatRows: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Tensor& part = in(k);
        const std::size_t count = part.size();
        Tensor gp(part.shape(), std::vector<double>(g.values().begin() + offset,
                                                    g.values().begin() + offset + count));
        offset += count;
        accumulate(k, std::move(gp));
      }
      return;
    }
    case OpKind::kConv2dValid: {
      const Tensor& x = in(0);
      const Tensor& k = in(1);
      const ImageGeometry& gi = n.params.geometry;
      const std::size_t kh = n.params.kernel_h, kw = n.params.kernel_w;
      const ImageGeometry og = conv_output_geometry(gi, k.rows(), kh, kw);
      Tensor gx = Tensor::matrix(x.rows(), x.cols());
      Tensor gk = Tensor::matrix(k.rows(), k.cols());
      const std::size_t plane = gi.height * gi.width;
      for (std::size_t b = 0; b < x.rows(); ++b) {
        const double* xb = &x.values()[b * gi.size()];
        double* gxb = &gx.values()[b * gi.size()];
        const double* gb = &g.values()[b * og.size()];
        for (std::size_t o = 0; o < og.channels; ++o) {
          const double* ko = &k.values()[o * k.cols()];
          double* gko = &gk.values()[o * k.cols()];
          const double* go = gb + o * og.height * og.width;
          for (std::size_t c = 0; c < gi.channels; ++c) {
            const double* xc = xb + c * plane;
            double* gxc = gxb + c * plane;
            for (std::size_t u = 0; u < kh; ++u) {
              for (std::size_t v = 0; v < kw; ++v) {
                const std::size_t widx = (c * kh + u) * kw + v;
                const double w = ko[widx];
                double acc = 0.0;
                for (std::size_t r = 0; r < og.height; ++r) {
                  const double* xr = xc + (r + u) * gi.width + v;
                  double* gxr = gxc + (r + u) * gi.width + v;
                  const double* gr = go + r * og.width;
                  for (std::size_t s = 0; s < og.width; ++s) {
                    acc += gr[s] * xr[s];
                    gxr[s] += gr[s] * w;
                  }
                }
                gko[widx] += acc;
              }
            }
          }
        }
      }
      accumulate(0, std::move(gx));
      accumulate(1, std::move(gk));
      return;
    }
    case OpKind::kAvgPool2x2: {
      const Tensor& x = in(0);
      const ImageGeometry& gi = n.params.geometry;
      const ImageGeometry og = pool_output_geometry(gi);
      Tensor gx = Tensor::matrix(x.rows(), x.cols());
      for (std::size_t b = 0; b < x.rows(); ++b) {
        for (std::size_t c = 0; c < gi.channels; ++c) {
          double* gxc = &gx.values()[b * gi.size() + c * gi.height * gi.width];
          const double* gc = &g.values()[b * og.size() + c * og.height * og.width];
          for (std::size_t r = 0; r < og.height; ++r) {
            for (std::size_t s = 0; s < og.width; ++s) {
              const double v = 0.25 * gc[r * og.width + s];
              double* p = gxc + 2 * r * gi.width + 2 * s;
              p[0] += v;
              p[1] += v;
              p[gi.width] += v;
              p[gi.width + 1] += v;
            }
          }
        }
      }
      accumulate(0, std::move(gx));
      return;
    }
    case OpKind::kCrossEntropy: {
      const Tensor& z = in(0);
      Tensor gz = softmax_rows_value(z);
      const double scale = g.item() / static_cast<double>(z.rows());
      for (std::size_t r = 0; r < z.rows(); ++r) {
        gz(r, static_cast<std::size_t>(n.params.labels[r])) -= 1.0;
      }
      for (double& v : gz.values()) v *= scale;
      accumulate(0, std::move(gz));
      return;
    }
    case OpKind::kTranspose:
      accumulate(0, cec::transpose(g));
      return;
  }
}

BackwardResult Graph::backward(const Bindings& bindings, NodeId root) {
  const Tensor& out = forward(bindings, root);
  if (out.size() != 1) {
    throw ShapeError(fmt::format("backward: root {} is not scalar (shape {})",
                                 describe(root.index), shape_to_string(out.shape())));
  }
  const std::vector<bool> mark = reachable_from(root);
  std::vector<Tensor> grads(nodes_.size());
  std::vector<bool> has_grad(nodes_.size(), false);
  grads[root.index] = Tensor(out.shape(), {1.0});
  has_grad[root.index] = true;

  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (!mark[i] || !has_grad[i] || !nodes_[i].op) continue;
    backprop_node(i, grads[i], grads, has_grad);
  }

  BackwardResult result;
  result.loss = out.item();
  for (const auto& [id, value] : bindings) {
    if (id.index >= nodes_.size()) continue;
    const Node& n = nodes_[id.index];
    if (n.op || !n.trainable) continue;
    if (has_grad[id.index]) {
      result.grads.emplace(id, std::move(grads[id.index]));
    } else {
      result.grads.emplace(id, Tensor(value.shape()));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// BoundGraph

NodeId BoundGraph::parameter(const std::string& name, Tensor value) {
  if (named.contains(name)) throw std::invalid_argument("duplicate graph leaf '" + name + "'");
  NodeId id = graph.parameter(name);
  bindings.emplace(id, std::move(value));
  named.emplace(name, id);
  return id;
}

NodeId BoundGraph::constant(const std::string& name, Tensor value) {
  if (named.contains(name)) throw std::invalid_argument("duplicate graph leaf '" + name + "'");
  NodeId id = graph.constant(name);
  bindings.emplace(id, std::move(value));
  named.emplace(name, id);
  return id;
}

NodeId BoundGraph::constant(Tensor value) {
  NodeId id = graph.constant("");
  bindings.emplace(id, std::move(value));
  return id;
}

NodeId BoundGraph::at(const std::string& name) const {
  auto it = named.find(name);
  if (it == named.end()) throw std::out_of_range("no graph leaf named '" + name + "'");
  return it->second;
}

ParamSet BoundGraph::named_grads(const BackwardResult& result) const {
  ParamSet out;
  for (const auto& [name, id] : named) {
    auto it = result.grads.find(id);
    if (it != result.grads.end()) out.emplace(name, it->second);
  }
  return out;
}

}  // namespace cec

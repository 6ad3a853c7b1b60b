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

#include "cec/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

double grad_check(Graph& graph, const Bindings& bindings, double eps) {
  return grad_check(graph, bindings, eps, graph.last());
}

double grad_check(Graph& graph, const Bindings& bindings, double eps, NodeId root) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

  const BackwardResult analytic = graph.backward(bindings, root);
  for (NodeId relu : graph.nodes_of(OpKind::kRelu)) {
    if (relu.index > root.index) continue;
    const Tensor& x = graph.value(graph.node(relu).inputs.front());
    for (double v : x.values()) {
      if (std::abs(v) < 10.0 * eps) {
        throw KinkError(fmt::format(
            "grad_check: relu node #{} has input {:.3e} within 10*eps of its kink; resample the "
            "evaluation point",
            relu.index, v));
      }
    }
  }

  Bindings probe = bindings;
  double worst = 0.0;
  for (const auto& [id, grad] : analytic.grads) {
    Tensor& x = probe.at(id);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + eps;
      const double up = graph.forward(probe, root).item();
      x[i] = saved - eps;
      const double down = graph.forward(probe, root).item();
      x[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(grad[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace cec

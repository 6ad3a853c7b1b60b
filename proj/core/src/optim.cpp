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

#include "cec/optim.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

SgdState make_sgd_state(const ParamSet& params, double learning_rate, double momentum) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must be in [0, 1)");
  SgdState state{learning_rate, momentum, {}};
  for (const auto& [name, p] : params) state.velocity.emplace(name, Tensor(p.shape()));
  return state;
}

SgdUpdate sgd_step(const ParamSet& params, const ParamSet& grads, const SgdState& state) {
  SgdUpdate out{params, state};
  for (auto& [name, p] : out.params) {
    auto g = grads.find(name);
    auto v = out.state.velocity.find(name);
    if (g == grads.end()) throw std::invalid_argument("sgd_step: no gradient for '" + name + "'");
    if (v == out.state.velocity.end()) {
      throw std::invalid_argument("sgd_step: no velocity for '" + name + "'");
    }
    if (g->second.shape() != p.shape() || v->second.shape() != p.shape()) {
      throw ShapeError(fmt::format("sgd_step: '{}' has shape {}, gradient {}, velocity {}", name,
                                   shape_to_string(p.shape()), shape_to_string(g->second.shape()),
                                   shape_to_string(v->second.shape())));
    }
    Tensor& vel = v->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      vel[i] = state.momentum * vel[i] + g->second[i];
      p[i] -= state.learning_rate * vel[i];
    }
  }
  return out;
}

}  // namespace cec

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

#include "cec/tensor.hpp"

namespace cec {

/// SGD with momentum. Velocity holds one tensor per parameter, same shape.
struct SgdState {
  double learning_rate = 0.1;
  double momentum = 0.0;
  ParamSet velocity;
};

/// Fresh optimizer state with zero velocity for every parameter.
SgdState make_sgd_state(const ParamSet& params, double learning_rate, double momentum);

struct SgdUpdate {
  ParamSet params;
  SgdState state;
};

/// v' = momentum * v + g;  p' = p - lr * v'.
///
/// Pure: the inputs are not modified. Every parameter needs a gradient and
/// a velocity of identical shape.
SgdUpdate sgd_step(const ParamSet& params, const ParamSet& grads, const SgdState& state);

}  // namespace cec

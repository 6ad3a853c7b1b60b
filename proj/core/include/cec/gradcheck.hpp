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

#include "cec/graph.hpp"

namespace cec {

/// Compares reverse-mode gradients of every bound trainable leaf against
/// central differences with step `eps`.
///
/// Returns max |analytic - numeric| / max(1, |numeric|) over all leaf
/// coordinates. Throws KinkError when any relu input lies within 10*eps of
/// zero, since the finite difference is meaningless there.
double grad_check(Graph& graph, const Bindings& bindings, double eps, NodeId root);
double grad_check(Graph& graph, const Bindings& bindings, double eps);

}  // namespace cec

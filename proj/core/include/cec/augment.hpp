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

#include <nlohmann/json.hpp>

#include "cec/image.hpp"

namespace cec {

/// Training-time augmentation: random scale, then random crop from an
/// edge-replicated padding, then random horizontal flip.
struct AugmentConfig {
  bool enabled = true;
  std::size_t crop_padding = 2;
  bool horizontal_flip = true;
  bool random_scale = true;
  double scale_min = 0.9;
  double scale_max = 1.1;
  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

/// Deterministic in (img, cfg, seed). Returns the input unchanged when
/// augmentation is disabled.
Image augment_image(const Image& img, const AugmentConfig& cfg, std::uint64_t seed);

void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);

}  // namespace cec

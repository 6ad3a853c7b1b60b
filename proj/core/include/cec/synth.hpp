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

#include "cec/dataset.hpp"

namespace cec {

/// Per-image variation of the synthetic blob generator, in units of the
/// image side (jitters) or pixel intensity (noise, background).
struct BlobStyle {
  double center_jitter = 0.05;
  double scale_jitter = 0.10;
  double angle_jitter = 0.15;  // radians
  double noise = 0.05;
  double background = 0.05;
  friend bool operator==(const BlobStyle&, const BlobStyle&) = default;
};

/// Seeded grayscale stand-in for a benchmark dataset. Each class is an
/// elongated Gaussian blob with a class-specific centre, scale and
/// orientation plus a smaller off-axis companion blob, so class patterns are
/// not rotation symmetric. Images are side x side, one channel.
Dataset synth_blob_dataset(std::size_t classes, std::size_t per_class_train,
                           std::size_t per_class_test, std::size_t side, std::uint64_t seed,
                           const BlobStyle& style = {});

void to_json(nlohmann::json& j, const BlobStyle& s);
void from_json(const nlohmann::json& j, BlobStyle& s);

}  // namespace cec

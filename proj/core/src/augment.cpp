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

#include "cec/augment.hpp"

#include <random>
#include <stdexcept>

#include "cec/random.hpp"

namespace cec {

Image augment_image(const Image& img, const AugmentConfig& cfg, std::uint64_t seed) {
  if (!cfg.enabled) return img;
  if (cfg.scale_min <= 0.0 || cfg.scale_max < cfg.scale_min) {
    throw std::invalid_argument("augment: invalid scale range");
  }
  Rng rng(seed);
  Image out = img;
  if (cfg.random_scale) {
    const double s = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
    out = rescale_centered(out, s);
  }
  if (cfg.crop_padding > 0) {
    std::uniform_int_distribution<std::size_t> offset(0, 2 * cfg.crop_padding);
    const std::size_t top = offset(rng);
    const std::size_t left = offset(rng);
    out = pad_and_crop(out, cfg.crop_padding, top, left);
  }
  if (cfg.horizontal_flip && std::bernoulli_distribution(0.5)(rng)) out = flip_horizontal(out);
  return out;
}

void to_json(nlohmann::json& j, const AugmentConfig& c) {
  j = {{"enabled", c.enabled},         {"crop_padding", c.crop_padding},
       {"horizontal_flip", c.horizontal_flip}, {"random_scale", c.random_scale},
       {"scale_min", c.scale_min},     {"scale_max", c.scale_max}};
}

void from_json(const nlohmann::json& j, AugmentConfig& c) {
  AugmentConfig d;
  c.enabled = j.value("enabled", d.enabled);
  c.crop_padding = j.value("crop_padding", d.crop_padding);
  c.horizontal_flip = j.value("horizontal_flip", d.horizontal_flip);
  c.random_scale = j.value("random_scale", d.random_scale);
  c.scale_min = j.value("scale_min", d.scale_min);
  c.scale_max = j.value("scale_max", d.scale_max);
}

}  // namespace cec

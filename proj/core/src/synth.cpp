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

#include "cec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cec/random.hpp"

namespace cec {

namespace {

struct Blob {
  double cy, cx;
  double sigma_major, sigma_minor;
  double angle;
  double amplitude;
};

struct ClassPattern {
  Blob main;
  Blob companion;
};

ClassPattern make_pattern(std::size_t side, Rng& rng) {
  const double s = static_cast<double>(side);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  ClassPattern p;
  p.main.cy = uni(0.22, 0.78) * (s - 1.0);
  p.main.cx = uni(0.22, 0.78) * (s - 1.0);
  p.main.sigma_major = uni(0.12, 0.22) * s;
  p.main.sigma_minor = p.main.sigma_major * uni(0.3, 0.6);
  p.main.angle = uni(0.0, std::numbers::pi);
  p.main.amplitude = 1.0;

  const double dir = uni(0.0, 2.0 * std::numbers::pi);
  const double dist = uni(0.20, 0.35) * s;
  p.companion.cy = p.main.cy + dist * std::sin(dir);
  p.companion.cx = p.main.cx + dist * std::cos(dir);
  p.companion.sigma_major = uni(0.06, 0.10) * s;
  p.companion.sigma_minor = p.companion.sigma_major;
  p.companion.angle = 0.0;
  p.companion.amplitude = uni(0.4, 0.8);
  return p;
}

double blob_value(const Blob& b, double r, double c) {
  const double dy = r - b.cy, dx = c - b.cx;
  const double ca = std::cos(b.angle), sa = std::sin(b.angle);
  const double u = dx * ca + dy * sa;
  const double v = -dx * sa + dy * ca;
  return b.amplitude *
         std::exp(-0.5 * (u * u / (b.sigma_major * b.sigma_major) +
                          v * v / (b.sigma_minor * b.sigma_minor)));
}

Image render(const ClassPattern& pattern, std::size_t side, const BlobStyle& style, Rng& rng) {
  const double s = static_cast<double>(side);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const double shift_y = gauss(rng) * style.center_jitter * s;
  const double shift_x = gauss(rng) * style.center_jitter * s;
  const double scale = 1.0 + style.scale_jitter * (2.0 * u01(rng) - 1.0);
  const double turn = gauss(rng) * style.angle_jitter;
  const double gain = 0.75 + 0.25 * u01(rng);

  ClassPattern p = pattern;
  for (Blob* b : {&p.main, &p.companion}) {
    b->cy += shift_y;
    b->cx += shift_x;
    b->sigma_major *= scale;
    b->sigma_minor *= scale;
    b->amplitude *= gain;
  }
  p.main.angle += turn;

  std::vector<double> pixels(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double rr = static_cast<double>(r), cc = static_cast<double>(c);
      const double v = style.background + blob_value(p.main, rr, cc) +
                       blob_value(p.companion, rr, cc) + style.noise * gauss(rng);
      pixels[r * side + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return Image(1, side, side, std::move(pixels));
}

}  // namespace

Dataset synth_blob_dataset(std::size_t classes, std::size_t per_class_train,
                           std::size_t per_class_test, std::size_t side, std::uint64_t seed,
                           const BlobStyle& style) {
  if (side < 8) throw std::invalid_argument("synth_blob_dataset: side must be at least 8");
  if (classes < 4) throw std::invalid_argument("synth_blob_dataset: need at least 4 classes");
  std::vector<std::vector<Image>> train(classes), test(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    Rng pattern_rng(derive_seed(seed, 2 * c));
    const ClassPattern pattern = make_pattern(side, pattern_rng);
    Rng image_rng(derive_seed(seed, 2 * c + 1));
    for (std::size_t i = 0; i < per_class_train; ++i) train[c].push_back(render(pattern, side, style, image_rng));
    for (std::size_t i = 0; i < per_class_test; ++i) test[c].push_back(render(pattern, side, style, image_rng));
  }
  return Dataset(std::move(train), std::move(test));
}

void to_json(nlohmann::json& j, const BlobStyle& s) {
  j = {{"center_jitter", s.center_jitter},
       {"scale_jitter", s.scale_jitter},
       {"angle_jitter", s.angle_jitter},
       {"noise", s.noise},
       {"background", s.background}};
}

void from_json(const nlohmann::json& j, BlobStyle& s) {
  const BlobStyle d;
  s.center_jitter = j.value("center_jitter", d.center_jitter);
  s.scale_jitter = j.value("scale_jitter", d.scale_jitter);
  s.angle_jitter = j.value("angle_jitter", d.angle_jitter);
  s.noise = j.value("noise", d.noise);
  s.background = j.value("background", d.background);
}

}  // namespace cec

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

#include "cec/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

Image::Image(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> pixels)
    : geometry_{channels, height, width}, pixels_(std::move(pixels)) {
  if (channels == 0 || height == 0 || width == 0) {
    throw ShapeError("image dimensions must be positive");
  }
  if (pixels_.size() != geometry_.size()) {
    throw ShapeError(fmt::format("image {}x{}x{} needs {} pixels, got {}", channels, height, width,
                                 geometry_.size(), pixels_.size()));
  }
  for (double v : pixels_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("image pixel outside [0, 1]");
  }
}

namespace {

template <typename SourceIndex>
Image remap(const Image& img, std::size_t out_h, std::size_t out_w, SourceIndex src) {
  std::vector<double> out(img.channels() * out_h * out_w);
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t r = 0; r < out_h; ++r) {
      for (std::size_t col = 0; col < out_w; ++col) {
        auto [sr, sc] = src(r, col);
        out[(c * out_h + r) * out_w + col] = img.at(c, sr, sc);
      }
    }
  }
  return Image(img.channels(), out_h, out_w, std::move(out));
}

double sample_bilinear(const Image& img, std::size_t c, double y, double x) {
  const double max_y = static_cast<double>(img.height() - 1);
  const double max_x = static_cast<double>(img.width() - 1);
  y = std::clamp(y, 0.0, max_y);
  x = std::clamp(x, 0.0, max_x);
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  const double top = img.at(c, y0, x0) * (1.0 - fx) + img.at(c, y0, x1) * fx;
  const double bottom = img.at(c, y1, x0) * (1.0 - fx) + img.at(c, y1, x1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

template <typename SourcePoint>
Image resample(const Image& img, SourcePoint src) {
  const std::size_t h = img.height(), w = img.width();
  std::vector<double> out(img.channels() * h * w);
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        auto [y, x] = src(static_cast<double>(r), static_cast<double>(col));
        out[(c * h + r) * w + col] = std::clamp(sample_bilinear(img, c, y, x), 0.0, 1.0);
      }
    }
  }
  return Image(img.channels(), h, w, std::move(out));
}

}  // namespace

Image rotate_right_angle(const Image& img, RightAngle angle) {
  const std::size_t h = img.height(), w = img.width();
  switch (angle) {
    case RightAngle::k180:
      return remap(img, h, w, [&](std::size_t r, std::size_t c) {
        return std::pair{h - 1 - r, w - 1 - c};
      });
    case RightAngle::k90:
    case RightAngle::k270:
      if (h != w) {
        throw ShapeError(fmt::format("rotate_right_angle: {} degrees needs a square image, got {}x{}",
                                     static_cast<int>(angle), h, w));
      }
      if (angle == RightAngle::k90) {
        return remap(img, h, w, [&](std::size_t r, std::size_t c) {
          return std::pair{c, w - 1 - r};
        });
      }
      return remap(img, h, w, [&](std::size_t r, std::size_t c) {
        return std::pair{w - 1 - c, r};
      });
  }
  throw std::invalid_argument("rotate_right_angle: unsupported angle");
}

Image rotate_arbitrary(const Image& img, double degrees) {
  if (img.height() != img.width()) {
    throw ShapeError(fmt::format("rotate_arbitrary: needs a square image, got {}x{}", img.height(),
                                 img.width()));
  }
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  return resample(img, [&](double r, double c) {
    const double dr = r - cy, dc = c - cx;
    return std::pair{cy + dr * cos_t + dc * sin_t, cx - dr * sin_t + dc * cos_t};
  });
}

Image rotate_by(const Image& img, double degrees) {
  double wrapped = std::fmod(degrees, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  if (wrapped == 0.0) return img;
  if (wrapped == 90.0) return rotate_right_angle(img, RightAngle::k90);
  if (wrapped == 180.0) return rotate_right_angle(img, RightAngle::k180);
  if (wrapped == 270.0) return rotate_right_angle(img, RightAngle::k270);
  return rotate_arbitrary(img, degrees);
}

Image flip_horizontal(const Image& img) {
  const std::size_t w = img.width();
  return remap(img, img.height(), w, [&](std::size_t r, std::size_t c) {
    return std::pair{r, w - 1 - c};
  });
}

Image rescale_centered(const Image& img, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("rescale_centered: scale must be positive");
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  return resample(img, [&](double r, double c) {
    return std::pair{cy + (r - cy) / scale, cx + (c - cx) / scale};
  });
}

Image pad_and_crop(const Image& img, std::size_t pad, std::size_t top, std::size_t left) {
  if (top > 2 * pad || left > 2 * pad) throw std::out_of_range("pad_and_crop: window outside padding");
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto p = static_cast<std::ptrdiff_t>(pad);
  return remap(img, img.height(), img.width(), [&](std::size_t r, std::size_t c) {
    const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(r + top) - p;
    const std::ptrdiff_t sc = static_cast<std::ptrdiff_t>(c + left) - p;
    return std::pair{static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sr, 0, h - 1)),
                     static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sc, 0, w - 1))};
  });
}

Tensor images_to_batch(std::span<const Image* const> images) {
  if (images.empty()) throw ShapeError("images_to_batch: empty batch");
  const ImageGeometry g = images.front()->geometry();
  std::vector<double> values;
  values.reserve(images.size() * g.size());
  for (const Image* img : images) {
    if (img->geometry() != g) throw ShapeError("images_to_batch: mixed image geometries");
    values.insert(values.end(), img->pixels().begin(), img->pixels().end());
  }
  return Tensor({images.size(), g.size()}, std::move(values));
}

Tensor images_to_batch(std::span<const Image> images) {
  std::vector<const Image*> ptrs;
  ptrs.reserve(images.size());
  for (const Image& img : images) ptrs.push_back(&img);
  return images_to_batch(ptrs);
}

}  // namespace cec

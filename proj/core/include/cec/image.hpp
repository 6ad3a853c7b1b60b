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

#include <span>
#include <vector>

#include "cec/graph.hpp"
#include "cec/tensor.hpp"

namespace cec {

/// Channel-planar row-major image with every pixel in [0, 1].
class Image {
 public:
  Image() = default;
  Image(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> pixels);

  std::size_t channels() const { return geometry_.channels; }
  std::size_t height() const { return geometry_.height; }
  std::size_t width() const { return geometry_.width; }
  const ImageGeometry& geometry() const { return geometry_; }
  std::span<const double> pixels() const { return pixels_; }

  double at(std::size_t c, std::size_t r, std::size_t col) const {
    return pixels_[(c * geometry_.height + r) * geometry_.width + col];
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  ImageGeometry geometry_;
  std::vector<double> pixels_;
};

enum class RightAngle { k90 = 90, k180 = 180, k270 = 270 };

/// Exact counter-clockwise rotation: at 90 degrees out[r][c] = in[c][W-1-r].
/// 90 and 270 require a square image.
Image rotate_right_angle(const Image& img, RightAngle angle);

/// Counter-clockwise rotation about the image centre with bilinear sampling;
/// samples falling outside the image take the nearest edge pixel.
Image rotate_arbitrary(const Image& img, double degrees);

/// Dispatches to the exact permutation for multiples of 90 degrees (0 is the
/// identity) and to bilinear rotation otherwise.
Image rotate_by(const Image& img, double degrees);

Image flip_horizontal(const Image& img);

/// Bilinear resample at `scale` about the image centre, edge-replicated,
/// keeping the original size.
Image rescale_centered(const Image& img, double scale);

/// Edge-replicate pad by `pad` on every side, then crop the window whose
/// top-left corner is (top, left) in padded coordinates.
Image pad_and_crop(const Image& img, std::size_t pad, std::size_t top, std::size_t left);

/// Stacks images into a [N, C*H*W] batch; all images must share geometry.
Tensor images_to_batch(std::span<const Image> images);
Tensor images_to_batch(std::span<const Image* const> images);

}  // namespace cec

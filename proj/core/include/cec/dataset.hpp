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
#include <filesystem>
#include <span>
#include <vector>

#include "cec/image.hpp"

namespace cec {

enum class Split { kTrain, kTest };

/// One image of a dataset, addressed by class and position in that class.
struct SampleRef {
  int class_id = 0;
  std::size_t index = 0;
  friend auto operator<=>(const SampleRef&, const SampleRef&) = default;
};

/// Class-indexed train/test image store with contiguous class ids 0..C-1.
/// All images share one geometry.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::vector<Image>> train, std::vector<std::vector<Image>> test);

  std::size_t num_classes() const { return train_.size(); }
  const ImageGeometry& geometry() const { return geometry_; }

  const std::vector<Image>& images(Split split, int class_id) const;
  const std::vector<Image>& train(int class_id) const { return images(Split::kTrain, class_id); }
  const std::vector<Image>& test(int class_id) const { return images(Split::kTest, class_id); }
  const Image& image(Split split, const SampleRef& ref) const;

  std::size_t count(Split split) const;

  /// Every referenced image plus its class id, in reference order.
  std::vector<const Image*> gather(Split split, std::span<const SampleRef> refs) const;

 private:
  void check_class(int class_id) const;

  std::vector<std::vector<Image>> train_;
  std::vector<std::vector<Image>> test_;
  ImageGeometry geometry_;
};

/// All test samples of the given classes, class by class.
std::vector<SampleRef> test_samples(const Dataset& data, std::span<const int> classes);
/// All training samples of the given classes, class by class.
std::vector<SampleRef> train_samples(const Dataset& data, std::span<const int> classes);

}  // namespace cec

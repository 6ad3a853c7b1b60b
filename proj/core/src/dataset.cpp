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

#include "cec/dataset.hpp"

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

Dataset::Dataset(std::vector<std::vector<Image>> train, std::vector<std::vector<Image>> test)
    : train_(std::move(train)), test_(std::move(test)) {
  if (train_.size() != test_.size()) {
    throw std::invalid_argument(fmt::format("dataset: {} train classes but {} test classes",
                                            train_.size(), test_.size()));
  }
  if (train_.empty()) throw std::invalid_argument("dataset: no classes");
  bool have_geometry = false;
  for (const auto* split : {&train_, &test_}) {
    for (const auto& cls : *split) {
      for (const Image& img : cls) {
        if (!have_geometry) {
          geometry_ = img.geometry();
          have_geometry = true;
        } else if (img.geometry() != geometry_) {
          throw ShapeError("dataset: images have mixed geometries");
        }
      }
    }
  }
}

void Dataset::check_class(int class_id) const {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= train_.size()) {
    throw std::out_of_range(fmt::format("class id {} outside [0, {})", class_id, train_.size()));
  }
}

const std::vector<Image>& Dataset::images(Split split, int class_id) const {
  check_class(class_id);
  return split == Split::kTrain ? train_[class_id] : test_[class_id];
}

const Image& Dataset::image(Split split, const SampleRef& ref) const {
  const auto& cls = images(split, ref.class_id);
  if (ref.index >= cls.size()) {
    throw std::out_of_range(fmt::format("class {} has {} images, index {} requested", ref.class_id,
                                        cls.size(), ref.index));
  }
  return cls[ref.index];
}

std::size_t Dataset::count(Split split) const {
  std::size_t n = 0;
  for (const auto& cls : split == Split::kTrain ? train_ : test_) n += cls.size();
  return n;
}

std::vector<const Image*> Dataset::gather(Split split, std::span<const SampleRef> refs) const {
  std::vector<const Image*> out;
  out.reserve(refs.size());
  for (const SampleRef& r : refs) out.push_back(&image(split, r));
  return out;
}

namespace {

std::vector<SampleRef> samples_of(const Dataset& data, Split split, std::span<const int> classes) {
  std::vector<SampleRef> out;
  for (int c : classes) {
    const std::size_t n = data.images(split, c).size();
    for (std::size_t i = 0; i < n; ++i) out.push_back({c, i});
  }
  return out;
}

}  // namespace

std::vector<SampleRef> test_samples(const Dataset& data, std::span<const int> classes) {
  return samples_of(data, Split::kTest, classes);
}

std::vector<SampleRef> train_samples(const Dataset& data, std::span<const int> classes) {
  return samples_of(data, Split::kTrain, classes);
}

}  // namespace cec

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

#include <filesystem>
#include <vector>

#include "cec/dataset.hpp"

namespace cec {

// CIFAR-100 binary layout: per record one coarse-label byte, one fine-label
// byte, then 3072 pixel bytes (R, G, B planes of 32x32, row-major).
inline constexpr std::size_t kCifarImageSide = 32;
inline constexpr std::size_t kCifarRecordSize = 2 + 3 * 32 * 32;
inline constexpr int kCifar100Classes = 100;

struct CifarRecord {
  int coarse_label = 0;
  int fine_label = 0;
  Image image;
};

/// Parses one CIFAR-100 binary file. Pixels are scaled to [0, 1].
/// Throws FormatError on a length that is not a whole number of records or a
/// fine label >= 100.
std::vector<CifarRecord> read_cifar100_file(const std::filesystem::path& file);

/// Loads `train.bin` and `test.bin` from a cifar-100-binary directory.
/// Fine labels become class ids; coarse labels are dropped.
Dataset load_cifar100_binary(const std::filesystem::path& dir);

}  // namespace cec

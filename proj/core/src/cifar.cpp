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

#include "cec/cifar.hpp"

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/param_io.hpp"

namespace cec {

std::vector<CifarRecord> read_cifar100_file(const std::filesystem::path& file) {
  const std::string bytes = read_text_file(file);
  if (bytes.empty() || bytes.size() % kCifarRecordSize != 0) {
    throw FormatError(fmt::format("{}: size {} is not a multiple of the {}-byte record",
                                  file.string(), bytes.size(), kCifarRecordSize));
  }
  const std::size_t n = bytes.size() / kCifarRecordSize;
  constexpr std::size_t kPixels = kCifarRecordSize - 2;
  std::vector<CifarRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* rec = reinterpret_cast<const unsigned char*>(bytes.data() + i * kCifarRecordSize);
    const int coarse = rec[0];
    const int fine = rec[1];
    if (fine >= kCifar100Classes) {
      throw FormatError(fmt::format("{}: record {} has fine label {}", file.string(), i, fine));
    }
    std::vector<double> pixels(kPixels);
    for (std::size_t p = 0; p < kPixels; ++p) pixels[p] = rec[2 + p] / 255.0;
    records.push_back({coarse, fine, Image(3, kCifarImageSide, kCifarImageSide, std::move(pixels))});
  }
  return records;
}

Dataset load_cifar100_binary(const std::filesystem::path& dir) {
  std::vector<std::vector<Image>> train(kCifar100Classes), test(kCifar100Classes);
  for (auto& rec : read_cifar100_file(dir / "train.bin")) train[rec.fine_label].push_back(std::move(rec.image));
  for (auto& rec : read_cifar100_file(dir / "test.bin")) test[rec.fine_label].push_back(std::move(rec.image));
  return Dataset(std::move(train), std::move(test));
}

}  // namespace cec

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
#include <span>
#include <vector>

#include "cec/dataset.hpp"

namespace cec {

struct EpisodeSample {
  Image image;
  int label = 0;          // episode-local label
  SampleRef source;       // training image it was drawn from
  double angle = 0.0;     // rotation applied, degrees
};

/// One pseudo-incremental task sampled from base-session data.
///
/// Pseudo-base classes get labels 0..way-1 and are never rotated. Each
/// pseudo-incremental class is rotated by its own angle and gets a fresh
/// synthetic label way..2*way-1, distinct from every original label.
struct PseudoEpisode {
  std::size_t way = 0, shot = 0, query = 0;
  std::vector<int> base_classes;
  std::vector<int> novel_classes;   // source class of each synthetic class
  std::vector<double> novel_angles;
  std::vector<int> novel_labels;

  std::vector<EpisodeSample> base_support, base_query;
  std::vector<EpisodeSample> novel_support, novel_query;
};

/// Samples `way` pseudo-base and `way` disjoint pseudo-incremental classes
/// from `classes`, each with `shot` support and `query` query images, and
/// rotates every pseudo-incremental class by an angle drawn from
/// `angle_pool`. Pure function of its inputs and `seed`.
PseudoEpisode sample_pseudo_episode(const Dataset& data, std::span<const int> classes,
                                    std::size_t way, std::size_t shot, std::size_t query,
                                    std::uint64_t seed, std::span<const double> angle_pool);

}  // namespace cec

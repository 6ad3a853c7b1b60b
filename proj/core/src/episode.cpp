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

#include "cec/episode.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "cec/random.hpp"

namespace cec {

PseudoEpisode sample_pseudo_episode(const Dataset& data, std::span<const int> classes,
                                    std::size_t way, std::size_t shot, std::size_t query,
                                    std::uint64_t seed, std::span<const double> angle_pool) {
  if (way == 0 || shot == 0 || query == 0) {
    throw std::invalid_argument("episode: way, shot and query must be positive");
  }
  if (angle_pool.empty()) throw std::invalid_argument("episode: angle pool is empty");
  if (classes.size() < 2 * way) {
    throw std::invalid_argument(fmt::format("episode: {}-way needs {} classes, only {} available",
                                            way, 2 * way, classes.size()));
  }

  Rng rng(seed);
  std::vector<int> order(classes.begin(), classes.end());
  std::shuffle(order.begin(), order.end(), rng);

  PseudoEpisode ep;
  ep.way = way;
  ep.shot = shot;
  ep.query = query;
  ep.base_classes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(way));
  ep.novel_classes.assign(order.begin() + static_cast<std::ptrdiff_t>(way),
                          order.begin() + static_cast<std::ptrdiff_t>(2 * way));

  auto draw = [&](int cls, int label, double angle, std::vector<EpisodeSample>& support,
                  std::vector<EpisodeSample>& queries) {
    const auto& imgs = data.train(cls);
    if (imgs.size() < shot + query) {
      throw std::invalid_argument(fmt::format("episode: class {} has {} images, {} needed", cls,
                                              imgs.size(), shot + query));
    }
    std::vector<std::size_t> idx(imgs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < shot + query; ++k) {
      const SampleRef ref{cls, idx[k]};
      EpisodeSample sample{angle == 0.0 ? imgs[idx[k]] : rotate_by(imgs[idx[k]], angle), label,
                           ref, angle};
      (k < shot ? support : queries).push_back(std::move(sample));
    }
  };

  for (std::size_t k = 0; k < way; ++k) {
    draw(ep.base_classes[k], static_cast<int>(k), 0.0, ep.base_support, ep.base_query);
  }
  std::uniform_int_distribution<std::size_t> pick(0, angle_pool.size() - 1);
  for (std::size_t k = 0; k < way; ++k) {
    const double angle = angle_pool[pick(rng)];
    const int label = static_cast<int>(way + k);
    ep.novel_angles.push_back(angle);
    ep.novel_labels.push_back(label);
    draw(ep.novel_classes[k], label, angle, ep.novel_support, ep.novel_query);
  }
  return ep;
}

}  // namespace cec

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

#include "cec/session_split.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "cec/random.hpp"

namespace cec {

std::vector<int> SessionSplit::seen_classes(std::size_t i) const {
  if (i >= sessions.size()) throw std::out_of_range("seen_classes: session index out of range");
  std::vector<int> out;
  for (std::size_t s = 0; s <= i; ++s) {
    out.insert(out.end(), sessions[s].classes.begin(), sessions[s].classes.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SessionSplit::label_space_sizes() const {
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (const Session& s : sessions) {
    total += s.classes.size();
    sizes.push_back(total);
  }
  return sizes;
}

SessionSplit make_session_split(const Dataset& data, std::size_t base_count,
                                std::size_t n_sessions, std::size_t way, std::size_t shot,
                                std::uint64_t seed) {
  if (base_count == 0) throw std::invalid_argument("session split: base session needs classes");
  if (n_sessions > 0 && (way == 0 || shot == 0)) {
    throw std::invalid_argument("session split: way and shot must be positive");
  }
  if (base_count + n_sessions * way != data.num_classes()) {
    throw std::invalid_argument(fmt::format(
        "session split: {} base + {} sessions x {}-way = {} classes, dataset has {}", base_count,
        n_sessions, way, base_count + n_sessions * way, data.num_classes()));
  }
  for (std::size_t c = 0; c < data.num_classes(); ++c) {
    if (data.test(static_cast<int>(c)).empty()) {
      throw std::invalid_argument(fmt::format("session split: class {} has no test images", c));
    }
  }

  SessionSplit split{base_count, way, shot, seed, {}};
  Session base{0, {}, {}};
  base.classes.resize(base_count);
  std::iota(base.classes.begin(), base.classes.end(), 0);
  base.train = train_samples(data, base.classes);
  split.sessions.push_back(std::move(base));

  for (std::size_t s = 1; s <= n_sessions; ++s) {
    Session session{s, {}, {}};
    for (std::size_t k = 0; k < way; ++k) {
      const int cls = static_cast<int>(base_count + (s - 1) * way + k);
      session.classes.push_back(cls);
      const std::size_t available = data.train(cls).size();
      if (available < shot) {
        throw std::invalid_argument(fmt::format(
            "session split: class {} has {} training images, {} shots needed", cls, available, shot));
      }
      std::vector<std::size_t> idx(available);
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(shot);
      std::sort(idx.begin(), idx.end());
      for (std::size_t i : idx) session.train.push_back({cls, i});
    }
    split.sessions.push_back(std::move(session));
  }
  return split;
}

std::vector<SampleRef> session_test_pool(const Dataset& data, const SessionSplit& split,
                                         std::size_t i) {
  const std::vector<int> classes = split.seen_classes(i);
  return test_samples(data, classes);
}

nlohmann::json split_to_json(const SessionSplit& split) {
  nlohmann::json sessions = nlohmann::json::array();
  for (const Session& s : split.sessions) {
    nlohmann::json shots = nlohmann::json::object();
    if (s.index > 0) {
      for (const SampleRef& r : s.train) shots[std::to_string(r.class_id)].push_back(r.index);
    }
    sessions.push_back({{"index", s.index}, {"classes", s.classes}, {"shot_indices", shots}});
  }
  return {{"base_count", split.base_count},
          {"way", split.way},
          {"shot", split.shot},
          {"seed", split.seed},
          {"sessions", sessions}};
}

SessionSplit split_from_json(const nlohmann::json& j, const Dataset& data) {
  SessionSplit split;
  split.base_count = j.at("base_count").get<std::size_t>();
  split.way = j.at("way").get<std::size_t>();
  split.shot = j.at("shot").get<std::size_t>();
  split.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& js : j.at("sessions")) {
    Session s;
    s.index = js.at("index").get<std::size_t>();
    s.classes = js.at("classes").get<std::vector<int>>();
    if (s.index == 0) {
      s.train = train_samples(data, s.classes);
    } else {
      for (int cls : s.classes) {
        for (std::size_t i : js.at("shot_indices").at(std::to_string(cls)).get<std::vector<std::size_t>>()) {
          s.train.push_back({cls, i});
        }
      }
    }
    split.sessions.push_back(std::move(s));
  }
  return split;
}

}  // namespace cec

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
#include <vector>

#include <nlohmann/json.hpp>

#include "cec/dataset.hpp"

namespace cec {

/// One FSCIL session: its own label space and its training samples.
struct Session {
  std::size_t index = 0;
  std::vector<int> classes;
  std::vector<SampleRef> train;
};

/// Ordered sessions 0..n. Session 0 holds the base classes with all their
/// training data; every later session holds `way` new classes with `shot`
/// fixed training images each. Label spaces are pairwise disjoint.
struct SessionSplit {
  std::size_t base_count = 0;
  std::size_t way = 0;
  std::size_t shot = 0;
  std::uint64_t seed = 0;
  std::vector<Session> sessions;

  std::size_t num_sessions() const { return sessions.size(); }
  /// Union of the label spaces of sessions 0..i, ascending.
  std::vector<int> seen_classes(std::size_t i) const;
  /// Cumulative label-space size per session.
  std::vector<std::size_t> label_space_sizes() const;
};

/// Classes are assigned in id order: 0..base_count-1 form the base session,
/// then consecutive blocks of `way`. Shot images of each incremental class
/// are a seeded sample without replacement, drawn once.
SessionSplit make_session_split(const Dataset& data, std::size_t base_count,
                                std::size_t n_sessions, std::size_t way, std::size_t shot,
                                std::uint64_t seed);

/// The cumulative test pool of session i: every test image of classes seen
/// so far.
std::vector<SampleRef> session_test_pool(const Dataset& data, const SessionSplit& split,
                                         std::size_t i);

nlohmann::json split_to_json(const SessionSplit& split);
/// Rebuilds a split from its manifest; the base session's training samples
/// are re-enumerated from `data`.
SessionSplit split_from_json(const nlohmann::json& j, const Dataset& data);

}  // namespace cec

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
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cec/tensor.hpp"

namespace cec {

/// A parameter checkpoint: named tensors plus free-form metadata (configs,
/// class-id lists, session ids).
struct ParamDocument {
  nlohmann::json meta = nlohmann::json::object();
  ParamSet params;
};

/// Serializes to the flat JSON parameter format:
///   {"format": "cec-params/1", "meta": {...},
///    "params": [{"name": ..., "shape": [...], "values": [...]}, ...]}
/// Every value is written with 17 significant digits, so a round trip
/// through text is exact.
std::string write_params_json(const ParamDocument& doc);
ParamDocument read_params_json(std::string_view text);

void save_params(const std::filesystem::path& path, const ParamDocument& doc);
ParamDocument load_params(const std::filesystem::path& path);

/// SHA-256 over names, shapes and the exact IEEE-754 bit patterns of every
/// value, in name order. Any single-bit change in any value changes it.
std::string params_digest(const ParamSet& params);

std::string sha256_hex(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cec

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

#include "cec/param_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "cec/error.hpp"

namespace cec {

namespace {

constexpr std::string_view kFormatTag = "cec-params/1";

}  // namespace

std::string write_params_json(const ParamDocument& doc) {
  std::string out;
  out.reserve(64);
  out += fmt::format("{{\n  \"format\": \"{}\",\n  \"meta\": {},\n  \"params\": [", kFormatTag,
                     doc.meta.dump());
  bool first = true;
  for (const auto& [name, tensor] : doc.params) {
    out += first ? "\n" : ",\n";
    first = false;
    out += fmt::format("    {{\"name\": {}, \"shape\": [{}], \"values\": [",
                       nlohmann::json(name).dump(), fmt::join(tensor.shape(), ", "));
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      if (i) out += ", ";
      // A bare "-0" would read back as the integer 0.
      out += tensor[i] == 0.0 && std::signbit(tensor[i]) ? "-0.0" : fmt::format("{:.17g}", tensor[i]);
    }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

ParamDocument read_params_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatTag) {
    throw FormatError("parameter file lacks format tag '" + std::string(kFormatTag) + "'");
  }
  ParamDocument doc;
  try {
    if (j.contains("meta")) doc.meta = j.at("meta");
    for (const auto& entry : j.at("params")) {
      auto name = entry.at("name").get<std::string>();
      auto shape = entry.at("shape").get<Shape>();
      auto values = entry.at("values").get<std::vector<double>>();
      if (doc.params.contains(name)) throw FormatError("duplicate parameter '" + name + "'");
      try {
        doc.params.emplace(name, Tensor(std::move(shape), std::move(values)));
      } catch (const ShapeError& e) {
        throw FormatError("parameter '" + name + "': " + e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed parameter file: ") + e.what());
  }
  return doc;
}

void save_params(const std::filesystem::path& path, const ParamDocument& doc) {
  write_text_file(path, write_params_json(doc));
}

ParamDocument load_params(const std::filesystem::path& path) {
  return read_params_json(read_text_file(path));
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string params_digest(const ParamSet& params) {
  std::string buf;
  auto put_u64 = [&buf](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  };
  for (const auto& [name, tensor] : params) {
    put_u64(name.size());
    buf += name;
    put_u64(tensor.rank());
    for (std::size_t d : tensor.shape()) put_u64(d);
    for (double v : tensor.values()) put_u64(std::bit_cast<std::uint64_t>(v));
  }
  return sha256_hex(buf);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace cec

// Copyright 2026 The clipcurate Authors.
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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/errors.hpp"
#include "clipcurate/eval_harness.hpp"

namespace clipcurate {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return path.string() + ".json";
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

}  // namespace

Matrix read_embeddings(const std::filesystem::path& path) {
  Json meta;
  try {
    meta = Json::parse(read_text_file(sidecar_path(path)));
  } catch (const Json::exception& e) {
    throw ValidationError(sidecar_path(path).string(), std::string("bad sidecar: ") + e.what());
  }
  if (!meta.contains("rows") || !meta.contains("dim") || !meta["rows"].is_number_unsigned() ||
      !meta["dim"].is_number_unsigned()) {
    throw ValidationError(sidecar_path(path).string(), "sidecar needs unsigned rows and dim");
  }
  const auto rows = meta["rows"].get<std::size_t>();
  const auto dim = meta["dim"].get<std::size_t>();
  const std::string bytes = read_text_file(path);
  if (bytes.size() != rows * dim * sizeof(float)) {
    throw ValidationError(path.string(), "expected " + std::to_string(rows * dim * 4) +
                                             " bytes for " + std::to_string(rows) + "x" +
                                             std::to_string(dim) + " float32, found " +
                                             std::to_string(bytes.size()));
  }
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + i * sizeof(float), sizeof(raw));
    data[i] = static_cast<double>(std::bit_cast<float>(to_little_endian(raw)));
  }
  return Matrix(rows, dim, std::move(data));
}

void write_embeddings(const std::filesystem::path& path, const Matrix& m) {
  std::string bytes(m.data().size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    const std::uint32_t raw =
        to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])));
    std::memcpy(bytes.data() + i * sizeof(float), &raw, sizeof(raw));
  }
  write_file_atomic(path, bytes);
  Json meta;
  meta["rows"] = m.rows();
  meta["dim"] = m.cols();
  write_file_atomic(sidecar_path(path), meta.dump() + "\n");
}

std::vector<std::vector<std::size_t>> parse_gt(const Json& j) {
  auto parse_list = [](const Json& v, const std::string& field) {
    if (!v.is_array()) throw ValidationError(field, "expected an array of indices");
    std::vector<std::size_t> out;
    for (const auto& x : v) {
      if (!x.is_number_unsigned()) throw ValidationError(field, "expected unsigned indices");
      out.push_back(x.get<std::size_t>());
    }
    return out;
  };
  std::vector<std::vector<std::size_t>> gt;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      gt.push_back(parse_list(j[i], "gt[" + std::to_string(i) + "]"));
    }
    return gt;
  }
  if (j.is_object()) {
    gt.resize(j.size());
    for (const auto& [key, value] : j.items()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ValidationError("gt." + key, "keys must be audio indices");
      }
      if (idx >= gt.size()) throw ValidationError("gt." + key, "audio indices must be 0..n-1");
      gt[idx] = parse_list(value, "gt." + key);
    }
    return gt;
  }
  throw ValidationError("gt", "expected an array or object");
}

}  // namespace clipcurate

// Copyright 2026 The CFA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfa/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "cfa/errors.hpp"

namespace cfa {
namespace {

constexpr std::size_t kFixedHeaderBytes = 4 + 4 + 1;

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.size() != 3 && shape.size() != 4) {
    throw TensorFormatError(TensorErrorKind::kBadShape,
                            "rank must be 3 or 4, got " +
                                std::to_string(shape.size()));
  }
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw TensorFormatError(TensorErrorKind::kBadShape,
                              "extents must be >= 1");
    }
    if (extent > std::numeric_limits<std::uint32_t>::max()) {
      throw TensorFormatError(TensorErrorKind::kBadShape,
                              "extent does not fit in 32 bits");
    }
  }
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
  }
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

struct Header {
  std::vector<std::size_t> shape;
  std::size_t payload_offset = 0;
};

Header parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kTensorMagic.size() ||
      std::memcmp(bytes.data(), kTensorMagic.data(), kTensorMagic.size()) !=
          0) {
    throw TensorFormatError(TensorErrorKind::kBadMagic,
                            "expected leading bytes \"CFAF\"");
  }
  if (bytes.size() < kFixedHeaderBytes) {
    throw TensorFormatError(TensorErrorKind::kTruncated,
                            "file ends inside the fixed header");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kTensorVersion) {
    throw TensorFormatError(TensorErrorKind::kBadVersion,
                            "unsupported version " + std::to_string(version));
  }
  const auto rank = static_cast<std::size_t>(bytes[8]);
  if (rank != 3 && rank != 4) {
    throw TensorFormatError(TensorErrorKind::kBadShape,
                            "rank must be 3 or 4, got " + std::to_string(rank));
  }
  Header header;
  header.payload_offset = kFixedHeaderBytes + 4 * rank;
  if (bytes.size() < header.payload_offset) {
    throw TensorFormatError(TensorErrorKind::kTruncated,
                            "file ends inside the shape block");
  }
  for (std::size_t i = 0; i < rank; ++i) {
    header.shape.push_back(get_u32(bytes, kFixedHeaderBytes + 4 * i));
  }
  check_shape(header.shape);
  return header;
}

std::vector<std::byte> read_file(const std::filesystem::path& path,
                                 std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TensorFormatError(TensorErrorKind::kIo,
                            "cannot open " + path.string());
  }
  std::vector<std::byte> bytes;
  char buffer[4096];
  while (bytes.size() < limit && in) {
    const auto want =
        static_cast<std::streamsize>(std::min(sizeof(buffer), limit - bytes.size()));
    in.read(buffer, want);
    const auto got = static_cast<std::size_t>(in.gcount());
    const auto* first = reinterpret_cast<const std::byte*>(buffer);
    bytes.insert(bytes.end(), first, first + got);
  }
  if (in.bad()) {
    throw TensorFormatError(TensorErrorKind::kIo,
                            "read failure on " + path.string());
  }
  return bytes;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

FeatureMap::FeatureMap(std::vector<std::size_t> shape,
                       std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.size() != 3 && shape_.size() != 4) {
    throw ConfigError("feature map rank must be 3 or 4");
  }
  std::size_t count = 1;
  for (std::size_t extent : shape_) {
    if (extent == 0) throw ConfigError("feature map extents must be >= 1");
    count *= extent;
  }
  if (count != values_.size()) {
    throw ConfigError("feature map shape does not match value count");
  }
}

FeatureMap FeatureMap::zeros(std::vector<std::size_t> shape) {
  std::size_t count = 1;
  for (std::size_t extent : shape) count *= extent;
  return FeatureMap(std::move(shape), std::vector<double>(count, 0.0));
}

std::size_t FeatureMap::locations() const noexcept {
  if (shape_.size() < 2) return 0;
  return std::accumulate(shape_.begin() + 1, shape_.end(), std::size_t{1},
                         std::multiplies<>());
}

std::vector<std::byte> encode_tensor(const FeatureMap& map) {
  check_shape(map.shape());
  std::vector<std::byte> out;
  out.reserve(kFixedHeaderBytes + 4 * map.rank() + 4 * map.size());
  for (char c : kTensorMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, kTensorVersion);
  out.push_back(static_cast<std::byte>(map.rank()));
  for (std::size_t extent : map.shape()) {
    put_u32(out, static_cast<std::uint32_t>(extent));
  }
  for (double v : map.values()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) {
      throw TensorFormatError(TensorErrorKind::kNonFinite,
                              "tensor contains a value not finite in float32");
    }
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

FeatureMap decode_tensor(std::span<const std::byte> bytes) {
  const Header header = parse_header(bytes);
  const std::size_t payload = bytes.size() - header.payload_offset;
  if (payload % 4 != 0) {
    throw TensorFormatError(TensorErrorKind::kTruncated,
                            "payload is not a whole number of float32 values");
  }
  // Compare against the declared element count without overflowing.
  const std::size_t available = payload / 4;
  std::size_t declared = 1;
  for (std::size_t extent : header.shape) {
    if (declared > available / extent) {
      declared = std::numeric_limits<std::size_t>::max();
      break;
    }
    declared *= extent;
  }
  if (declared != available) {
    throw TensorFormatError(
        TensorErrorKind::kPayloadMismatch,
        "shape declares " +
            (declared == std::numeric_limits<std::size_t>::max()
                 ? std::string("more")
                 : std::to_string(declared)) +
            " values but payload holds " + std::to_string(available));
  }
  std::vector<double> values(available);
  for (std::size_t i = 0; i < available; ++i) {
    const float f =
        std::bit_cast<float>(get_u32(bytes, header.payload_offset + 4 * i));
    if (!std::isfinite(f)) {
      throw TensorFormatError(TensorErrorKind::kNonFinite,
                              "payload contains NaN or infinity");
    }
    values[i] = f;
  }
  return FeatureMap(header.shape, std::move(values));
}

void write_tensor(const FeatureMap& map, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw TensorFormatError(TensorErrorKind::kIo,
                            "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw TensorFormatError(TensorErrorKind::kIo,
                            "write failure on " + path.string());
  }
}

FeatureMap read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path, std::numeric_limits<std::size_t>::max());
  return decode_tensor(bytes);
}

std::vector<std::size_t> read_tensor_shape(const std::filesystem::path& path) {
  const auto bytes = read_file(path, kFixedHeaderBytes + 4 * 4);
  return parse_header(bytes).shape;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kBase:
      return "base";
    case Split::kValidation:
      return "validation";
    case Split::kNovel:
      return "novel";
  }
  return "unknown";
}

Split parse_split(std::string_view token) {
  if (token == "base") return Split::kBase;
  if (token == "validation") return Split::kValidation;
  if (token == "novel") return Split::kNovel;
  throw DataError("unknown split token '" + std::string(token) + "'");
}

std::vector<int> DatasetManifest::classes(Split split) const {
  std::set<int> ids;
  for (const auto& r : records) {
    if (r.split == split) ids.insert(r.class_id);
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::size_t> DatasetManifest::samples_of(int class_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].class_id == class_id) out.push_back(i);
  }
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());

  DatasetManifest manifest;
  manifest.root = path.parent_path();
  std::map<int, Split> split_of_class;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";

    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 3 || fields[0].empty()) {
      throw DataError(where + "expected 'path,class_id,split'");
    }

    ManifestRecord record;
    record.path = fields[0];
    const auto& id = fields[1];
    const auto [end, ec] =
        std::from_chars(id.data(), id.data() + id.size(), record.class_id);
    if (ec != std::errc() || end != id.data() + id.size() ||
        record.class_id < 0) {
      throw DataError(where + "class_id must be a non-negative integer");
    }
    try {
      record.split = parse_split(fields[2]);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }

    const auto [it, inserted] =
        split_of_class.emplace(record.class_id, record.split);
    if (!inserted && it->second != record.split) {
      throw DataError(where + "split leak: class " +
                      std::to_string(record.class_id) + " listed under both " +
                      std::string(to_string(it->second)) + " and " +
                      std::string(to_string(record.split)));
    }

    const auto shape = read_tensor_shape(manifest.resolve(record));
    if (manifest.records.empty()) {
      manifest.channels = shape[0];
    } else if (shape[0] != manifest.channels) {
      throw DataError(where + "inconsistent channel count " +
                      std::to_string(shape[0]) + " (expected " +
                      std::to_string(manifest.channels) + ")");
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& r : manifest.records) {
    out << r.path.generic_string() << ',' << r.class_id << ','
        << to_string(r.split) << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

std::vector<FeatureMap> load_features(const DatasetManifest& manifest) {
  std::vector<FeatureMap> features;
  features.reserve(manifest.records.size());
  for (const auto& record : manifest.records) {
    features.push_back(read_tensor(manifest.resolve(record)));
  }
  return features;
}

}  // namespace cfa

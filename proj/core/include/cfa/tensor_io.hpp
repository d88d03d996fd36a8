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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace cfa {

/// Activations of one sample: C x H x W or C x T x H x W, row-major with the
/// channel axis slowest. Values are held in double precision; the on-disk
/// representation is float32.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::vector<std::size_t> shape, std::vector<double> values);

  static FeatureMap zeros(std::vector<std::size_t> shape);

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  /// Number of spatial (or spatio-temporal) locations, H*W or T*H*W.
  std::size_t locations() const noexcept;
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double at(std::size_t channel, std::size_t location) const {
    return values_[channel * locations() + location];
  }
  double& at(std::size_t channel, std::size_t location) {
    return values_[channel * locations() + location];
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

inline constexpr std::string_view kTensorMagic = "CFAF";
inline constexpr std::uint32_t kTensorVersion = 1;

/// Serializes to the CFAF v1 layout:
///   "CFAF" | u32 version | u8 rank | rank x u32 extents | float32 payload
/// All integers and floats little-endian. Values are narrowed to float32;
/// non-finite values are rejected.
std::vector<std::byte> encode_tensor(const FeatureMap& map);

/// Parses a CFAF buffer. Every malformed input raises TensorFormatError with a
/// distinct kind; no input can crash the decoder.
FeatureMap decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap read_tensor(const std::filesystem::path& path);

/// Reads only the header and returns the declared shape.
std::vector<std::size_t> read_tensor_shape(const std::filesystem::path& path);

enum class Split { kBase, kValidation, kNovel };

std::string_view to_string(Split split);
Split parse_split(std::string_view token);

struct ManifestRecord {
  std::filesystem::path path;  // as written in the manifest
  int class_id = 0;
  Split split = Split::kBase;
};

/// Labelled samples grouped into disjoint base / validation / novel classes.
struct DatasetManifest {
  std::filesystem::path root;  // directory the record paths are relative to
  std::vector<ManifestRecord> records;
  std::size_t channels = 0;  // 0 for an empty manifest

  std::filesystem::path resolve(const ManifestRecord& record) const {
    return record.path.is_absolute() ? record.path : root / record.path;
  }

  /// Distinct class ids in the split, ascending.
  std::vector<int> classes(Split split) const;
  /// Record indices of one class, in manifest order.
  std::vector<std::size_t> samples_of(int class_id) const;
};

/// Parses `path,class_id,split` lines (blank lines and `#` comments skipped)
/// and validates every record eagerly: split disjointness, unknown split
/// tokens, and a manifest-wide channel count read from each tensor header.
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

/// Loads every tensor of the manifest, index-aligned with `records`.
std::vector<FeatureMap> load_features(const DatasetManifest& manifest);

}  // namespace cfa

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
#include <span>
#include <vector>

#include "cfa/tensor_io.hpp"

namespace cfa {

/// One semantic subspace of a feature map: the channel slice
/// [index*dim, (index+1)*dim) at every location. Stored location-major so
/// that each local feature is contiguous.
struct SubspaceView {
  std::size_t index = 0;
  std::size_t dim = 0;
  std::size_t locations = 0;
  std::vector<double> features;  // locations x dim

  std::span<const double> feature(std::size_t location) const {
    return std::span<const double>(features).subspan(location * dim, dim);
  }
  double at(std::size_t channel, std::size_t location) const {
    return features[location * dim + channel];
  }
};

/// Splits the channel axis into `subspaces` contiguous groups of equal width.
/// Rank-4 maps flatten T*H*W into the location axis. Throws ConfigError when
/// `subspaces` is zero or does not divide the channel count.
std::vector<SubspaceView> split_channels(const FeatureMap& map,
                                         std::size_t subspaces);

/// Inverse of split_channels given the original shape.
FeatureMap merge_channels(std::span<const SubspaceView> views,
                          std::vector<std::size_t> shape);

}  // namespace cfa

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

#include "cfa/decomposition.hpp"

#include <string>

#include "cfa/errors.hpp"

namespace cfa {

std::vector<SubspaceView> split_channels(const FeatureMap& map,
                                         std::size_t subspaces) {
  const std::size_t channels = map.channels();
  if (subspaces == 0 || channels % subspaces != 0) {
    throw ConfigError("subspace count " + std::to_string(subspaces) +
                      " does not divide channel count " +
                      std::to_string(channels));
  }
  const std::size_t dim = channels / subspaces;
  const std::size_t locations = map.locations();

  std::vector<SubspaceView> views(subspaces);
  for (std::size_t n = 0; n < subspaces; ++n) {
    auto& view = views[n];
    view.index = n;
    view.dim = dim;
    view.locations = locations;
    view.features.resize(locations * dim);
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t i = 0; i < locations; ++i) {
        view.features[i * dim + j] = map.at(n * dim + j, i);
      }
    }
  }
  return views;
}

FeatureMap merge_channels(std::span<const SubspaceView> views,
                          std::vector<std::size_t> shape) {
  FeatureMap map = FeatureMap::zeros(std::move(shape));
  std::size_t channel = 0;
  for (const auto& view : views) {
    if (view.locations != map.locations()) {
      throw ConfigError("subspace view location count does not match shape");
    }
    for (std::size_t j = 0; j < view.dim; ++j, ++channel) {
      if (channel >= map.channels()) {
        throw ConfigError("subspace views exceed the channel count");
      }
      for (std::size_t i = 0; i < view.locations; ++i) {
        map.at(channel, i) = view.at(j, i);
      }
    }
  }
  if (channel != map.channels()) {
    throw ConfigError("subspace views do not cover every channel");
  }
  return map;
}

}  // namespace cfa

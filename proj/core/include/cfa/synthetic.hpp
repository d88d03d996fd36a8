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
#include <random>
#include <vector>

#include "cfa/tensor_io.hpp"

namespace cfa {

/// A compositional world: every class is a tuple of one attribute per latent
/// group, and every location of a sample shows one attribute's prototype in
/// that group's channel slice.
struct SyntheticSpec {
  std::size_t classes = 20;
  std::size_t samples_per_class = 40;
  std::size_t channels = 32;     // C
  std::size_t groups = 4;        // latent attribute groups N_true
  std::size_t height = 4;
  std::size_t width = 4;
  std::size_t vocab = 8;         // attributes per group A
  double noise = 0.3;            // within-attribute noise sigma_a
  /// Probability that a location shows a uniformly drawn attribute of its
  /// group instead of the class's own attribute.
  double clutter = 0.6;
  bool location_shuffle = true;
  std::size_t base_classes = 13;
  std::size_t validation_classes = 0;  // the remainder is novel
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticWorld {
  std::size_t groups = 0;
  std::size_t vocab = 0;
  std::size_t dim = 0;
  std::vector<double> prototypes;  // [(g * vocab + a) * dim + j]
  std::vector<std::vector<std::size_t>> class_attributes;
};

/// Draws the attribute prototypes (N(0,1) per channel) and one distinct
/// attribute tuple per class.
SyntheticWorld make_world(const SyntheticSpec& spec);

/// One C x H x W sample of a class with the given attribute tuple. Location i
/// carries group i mod groups before the optional shuffle. Values are rounded
/// to float32 so they survive a write/read cycle unchanged.
FeatureMap sample_features(const SyntheticSpec& spec,
                           const SyntheticWorld& world,
                           const std::vector<std::size_t>& attributes,
                           std::mt19937_64& rng);

struct SyntheticDataset {
  SyntheticWorld world;
  DatasetManifest manifest;  // records point at samples/<class>_<index>.cfaf
  std::vector<FeatureMap> features;
};

/// Deterministic in the spec: each sample draws from its own generator seeded
/// by (seed, class, index).
SyntheticDataset generate(const SyntheticSpec& spec);

/// Writes every tensor and `manifest.csv` under `directory`; returns the
/// manifest path.
std::filesystem::path write_dataset(const SyntheticDataset& dataset,
                                    const std::filesystem::path& directory);

}  // namespace cfa

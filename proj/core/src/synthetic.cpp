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

#include "cfa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cfa/errors.hpp"
#include "cfa/parallel.hpp"

namespace cfa {

void SyntheticSpec::validate() const {
  if (classes < 2 || samples_per_class == 0) {
    throw ConfigError("need >= 2 classes and >= 1 sample per class");
  }
  if (groups == 0 || channels % groups != 0) {
    throw ConfigError("groups must divide the channel count");
  }
  if (vocab < 2) throw ConfigError("attribute vocabulary must be >= 2");
  if (!(noise > 0.0)) throw ConfigError("noise must be positive");
  if (!(clutter >= 0.0 && clutter <= 1.0)) {
    throw ConfigError("clutter must lie in [0, 1]");
  }
  if (height == 0 || width == 0) throw ConfigError("spatial extents must be >= 1");
  if (base_classes + validation_classes > classes) {
    throw ConfigError("base + validation classes exceed the class count");
  }
  double tuples = 1.0;
  for (std::size_t g = 0; g < groups; ++g) tuples *= static_cast<double>(vocab);
  if (tuples < static_cast<double>(classes)) {
    throw ConfigError("vocab^groups is smaller than the class count");
  }
}

SyntheticWorld make_world(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SyntheticWorld world;
  world.groups = spec.groups;
  world.vocab = spec.vocab;
  world.dim = spec.channels / spec.groups;
  world.prototypes.resize(world.groups * world.vocab * world.dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : world.prototypes) v = normal(rng);

  std::set<std::vector<std::size_t>> seen;
  std::uniform_int_distribution<std::size_t> pick(0, spec.vocab - 1);
  while (world.class_attributes.size() < spec.classes) {
    std::vector<std::size_t> tuple(spec.groups);
    for (auto& a : tuple) a = pick(rng);
    if (seen.insert(tuple).second) world.class_attributes.push_back(tuple);
  }
  return world;
}

FeatureMap sample_features(const SyntheticSpec& spec,
                           const SyntheticWorld& world,
                           const std::vector<std::size_t>& attributes,
                           std::mt19937_64& rng) {
  if (attributes.size() != world.groups) {
    throw ConfigError("attribute tuple length must equal the group count");
  }
  const std::size_t locations = spec.height * spec.width;
  const std::size_t dim = world.dim;
  std::vector<std::size_t> order(locations);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (spec.location_shuffle) std::shuffle(order.begin(), order.end(), rng);

  std::normal_distribution<double> normal(0.0, spec.noise);
  std::bernoulli_distribution cluttered(spec.clutter);
  std::uniform_int_distribution<std::size_t> any_attribute(0, world.vocab - 1);

  FeatureMap map = FeatureMap::zeros({spec.channels, spec.height, spec.width});
  for (std::size_t slot = 0; slot < locations; ++slot) {
    const std::size_t location = order[slot];
    const std::size_t group = slot % world.groups;
    const std::size_t attribute =
        cluttered(rng) ? any_attribute(rng) : attributes[group];
    const double* prototype =
        world.prototypes.data() + (group * world.vocab + attribute) * dim;
    for (std::size_t c = 0; c < spec.channels; ++c) {
      double v = normal(rng);
      if (c / dim == group) v += prototype[c % dim];
      map.at(c, location) = static_cast<float>(v);
    }
  }
  return map;
}

SyntheticDataset generate(const SyntheticSpec& spec) {
  SyntheticDataset data;
  data.world = make_world(spec);
  data.manifest.channels = spec.channels;

  const std::size_t total = spec.classes * spec.samples_per_class;
  data.features.resize(total);
  data.manifest.records.resize(total);
  parallel_for(total, [&](std::size_t index) {
    const std::size_t cls = index / spec.samples_per_class;
    const std::size_t sample = index % spec.samples_per_class;
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(cls),
                      static_cast<std::uint32_t>(sample)};
    std::mt19937_64 rng(seq);
    data.features[index] =
        sample_features(spec, data.world, data.world.class_attributes[cls], rng);

    auto& record = data.manifest.records[index];
    record.class_id = static_cast<int>(cls);
    record.split = cls < spec.base_classes ? Split::kBase
                   : cls < spec.base_classes + spec.validation_classes
                       ? Split::kValidation
                       : Split::kNovel;
    record.path = "samples/c" + std::to_string(cls) + "_s" +
                  std::to_string(sample) + ".cfaf";
  });
  return data;
}

std::filesystem::path write_dataset(const SyntheticDataset& dataset,
                                    const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory / "samples");
  for (std::size_t i = 0; i < dataset.features.size(); ++i) {
    write_tensor(dataset.features[i], directory / dataset.manifest.records[i].path);
  }
  const auto manifest_path = directory / "manifest.csv";
  write_manifest(dataset.manifest, manifest_path);
  return manifest_path;
}

}  // namespace cfa

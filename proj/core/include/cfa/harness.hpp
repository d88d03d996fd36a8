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
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "cfa/aggregation.hpp"
#include "cfa/objective.hpp"
#include "cfa/tensor_io.hpp"

namespace cfa {

struct EpisodeShape {
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t queries = 16;
};

/// Record indices of one X-way Y-shot episode. support[c] and query[c] belong
/// to class_ids[c]; support and query never share a record.
struct Episode {
  std::size_t way = 0;
  std::size_t shot = 0;
  std::vector<int> class_ids;
  std::vector<std::vector<std::size_t>> support;
  std::vector<std::vector<std::size_t>> query;
};

/// Draws `way` distinct classes of the split uniformly without replacement,
/// then shot + queries distinct samples of each. Throws DataError when the
/// split is too small.
Episode sample_episode(const DatasetManifest& manifest, Split split,
                       const EpisodeShape& shape, std::mt19937_64& rng);

/// True when every class has enough samples and there are enough classes.
bool split_supports(const DatasetManifest& manifest, Split split,
                    const EpisodeShape& shape);

EpisodeFeatures gather_features(const Episode& episode,
                                std::span<const FeatureMap> features);

enum class PrototypeInit { kKMeans, kRandom };

struct TrainConfig {
  std::size_t subspaces = 4;  // N
  std::size_t prototypes = kDefaultPrototypes;  // K
  double alpha = kDefaultAlpha;
  double gamma = 0.0002;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;  // episodes per optimizer step
  std::size_t iterations = 60000;
  EpisodeShape episode;
  std::uint64_t seed = 0;
  std::size_t validation_every = 500;
  std::size_t validation_episodes = 100;
  double scale = 1.0;  // multiplier on cosine similarities in the softmax
  PrototypeInit init = PrototypeInit::kKMeans;
  std::size_t kmeans_samples = 4096;  // sub-features per subspace

  void validate() const;
};

/// Prototype bank for `channels`-wide inputs: k-means over sub-features
/// sampled from the base split, or N(0, 1/sqrt(dim)) draws when k-means is
/// not requested or there are fewer sub-features than prototypes.
CfaParams init_prototypes(const DatasetManifest& manifest,
                          std::span<const FeatureMap> features,
                          const TrainConfig& config, std::mt19937_64& rng);

struct CurvePoint {
  std::size_t iteration = 0;
  double loss = 0.0;
  double validation_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  CfaParams params;
  std::vector<CurvePoint> curve;
  std::size_t best_iteration = 0;
  double best_validation = std::numeric_limits<double>::quiet_NaN();
};

using TrainObserver = std::function<void(const CurvePoint&)>;

/// Episodic Adam training of the prototypes on the base split. Gradients of
/// `batch_size` episodes are averaged per step. When the validation split can
/// host an episode, accuracy is measured every `validation_every` iterations
/// and the best parameters are returned; otherwise the final ones are.
/// Throws NumericError on a non-finite loss.
TrainResult train(const DatasetManifest& manifest,
                  std::span<const FeatureMap> features,
                  const TrainConfig& config,
                  const TrainObserver& observer = {});

struct EvalOptions {
  EpisodeShape episode;
  std::size_t episodes = 600;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::size_t episodes = 0;
  double mean_accuracy = 0.0;  // percent
  double ci95 = 0.0;           // percent, half-width
  std::vector<double> per_episode;  // fractions in [0, 1]
};

/// mean and 1.96 * sample stddev / sqrt(n), both in percent. Needs n >= 2.
EvalReport summarize(std::span<const double> accuracies);

/// Maps a set of feature maps (Y shots or one query) to a unit vector.
using Embedder = std::function<Descriptor(std::span<const FeatureMap>)>;

/// Generic episodic evaluation: each class is represented by
/// embed_support(its shots), each query by embed_query({query}); a query is
/// correct when its most similar class (lowest index on ties) is its own.
EvalReport evaluate_with(const DatasetManifest& manifest,
                         std::span<const FeatureMap> features, Split split,
                         const EvalOptions& options,
                         const Embedder& embed_support,
                         const Embedder& embed_query);

/// Episodic accuracy of the CFA descriptor.
EvalReport evaluate(const DatasetManifest& manifest,
                    std::span<const FeatureMap> features, Split split,
                    const CfaParams& params, const EvalOptions& options);

/// Mean-pool + cosine comparison arm. A class is the L2-normalized mean of
/// its shots' pooled vectors.
EvalReport baseline_eval(const DatasetManifest& manifest,
                         std::span<const FeatureMap> features, Split split,
                         const EvalOptions& options);

/// `iteration,loss,val_accuracy`; the accuracy column is empty where no
/// validation ran.
void write_loss_curve(const std::vector<CurvePoint>& curve,
                      const std::filesystem::path& path);

/// `episodes,mean,ci95`.
void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& path);

}  // namespace cfa

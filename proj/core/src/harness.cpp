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

#include "cfa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "cfa/adam.hpp"
#include "cfa/classifier.hpp"
#include "cfa/decomposition.hpp"
#include "cfa/errors.hpp"
#include "cfa/kmeans.hpp"
#include "cfa/parallel.hpp"

namespace cfa {
namespace {

// Class id -> record indices, restricted to one split, ascending class ids.
std::map<int, std::vector<std::size_t>> index_split(
    const DatasetManifest& manifest, Split split) {
  std::map<int, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (r.split == split) index[r.class_id].push_back(i);
  }
  return index;
}

// First `count` entries of a uniform random permutation of `items`.
template <typename T>
std::vector<T> choose(std::vector<T> items, std::size_t count,
                      std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
  items.resize(count);
  return items;
}

// Validation episodes are fixed across checkpoints so that accuracies are
// comparable.
constexpr std::uint64_t kValidationSeedOffset = 0x9e3779b97f4a7c15ull;

}  // namespace

Episode sample_episode(const DatasetManifest& manifest, Split split,
                       const EpisodeShape& shape, std::mt19937_64& rng) {
  if (shape.way < 2 || shape.shot == 0 || shape.queries == 0) {
    throw ConfigError("episodes need way >= 2, shot >= 1 and queries >= 1");
  }
  const std::size_t per_class = shape.shot + shape.queries;
  const auto index = index_split(manifest, split);
  std::vector<int> eligible;
  for (const auto& [id, samples] : index) {
    if (samples.size() >= per_class) eligible.push_back(id);
  }
  if (eligible.size() < shape.way) {
    throw DataError("split '" + std::string(to_string(split)) + "' has " +
                    std::to_string(eligible.size()) + " classes with >= " +
                    std::to_string(per_class) + " samples, episode needs " +
                    std::to_string(shape.way));
  }

  Episode episode;
  episode.way = shape.way;
  episode.shot = shape.shot;
  episode.class_ids = choose(std::move(eligible), shape.way, rng);
  for (int id : episode.class_ids) {
    auto picked = choose(index.at(id), per_class, rng);
    episode.support.emplace_back(picked.begin(),
                                 picked.begin() + static_cast<std::ptrdiff_t>(shape.shot));
    episode.query.emplace_back(picked.begin() + static_cast<std::ptrdiff_t>(shape.shot),
                               picked.end());
  }
  return episode;
}

bool split_supports(const DatasetManifest& manifest, Split split,
                    const EpisodeShape& shape) {
  std::size_t eligible = 0;
  for (const auto& [id, samples] : index_split(manifest, split)) {
    if (samples.size() >= shape.shot + shape.queries) ++eligible;
  }
  return shape.way >= 2 && eligible >= shape.way;
}

EpisodeFeatures gather_features(const Episode& episode,
                                std::span<const FeatureMap> features) {
  EpisodeFeatures out;
  for (std::size_t c = 0; c < episode.class_ids.size(); ++c) {
    auto& shots = out.support.emplace_back();
    for (std::size_t r : episode.support[c]) shots.push_back(features[r]);
    for (std::size_t r : episode.query[c]) {
      out.queries.push_back(features[r]);
      out.query_labels.push_back(c);
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (subspaces == 0 || prototypes == 0) {
    throw ConfigError("N and K must be positive");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be finite and non-negative");
  }
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (episode.way < 2 || episode.shot == 0 || episode.queries == 0) {
    throw ConfigError("episodes need way >= 2, shot >= 1 and queries >= 1");
  }
  if (validation_every == 0) throw ConfigError("validation cadence must be positive");
  if (!(scale > 0.0)) throw ConfigError("similarity scale must be positive");
}

CfaParams init_prototypes(const DatasetManifest& manifest,
                          std::span<const FeatureMap> features,
                          const TrainConfig& config, std::mt19937_64& rng) {
  const std::size_t channels = manifest.channels;
  if (channels == 0 || channels % config.subspaces != 0) {
    throw ConfigError("N = " + std::to_string(config.subspaces) +
                      " does not divide the channel count " +
                      std::to_string(channels));
  }
  const std::size_t dim = channels / config.subspaces;
  const std::size_t k_count = config.prototypes;
  CfaParams params =
      CfaParams::zeros(config.subspaces, k_count, dim, config.alpha);

  std::vector<std::size_t> base;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (manifest.records[i].split == Split::kBase) base.push_back(i);
  }

  bool clustered = false;
  if (config.init == PrototypeInit::kKMeans && !base.empty()) {
    // Random (sample, location) pairs shared by all subspaces.
    std::vector<std::pair<std::size_t, std::size_t>> picks;
    std::uniform_int_distribution<std::size_t> pick_sample(0, base.size() - 1);
    for (std::size_t s = 0; s < config.kmeans_samples; ++s) {
      const std::size_t record = base[pick_sample(rng)];
      std::uniform_int_distribution<std::size_t> pick_loc(
          0, features[record].locations() - 1);
      picks.emplace_back(record, pick_loc(rng));
    }
    if (picks.size() >= k_count) {
      std::vector<double> points(picks.size() * dim);
      for (std::size_t n = 0; n < config.subspaces; ++n) {
        for (std::size_t p = 0; p < picks.size(); ++p) {
          const auto& map = features[picks[p].first];
          for (std::size_t j = 0; j < dim; ++j) {
            points[p * dim + j] = map.at(n * dim + j, picks[p].second);
          }
        }
        const auto centers = kmeans(points, dim, k_count, rng);
        std::copy(centers.begin(), centers.end(), params.centers(n).begin());
      }
      clustered = true;
    }
  }
  if (!clustered) {
    std::normal_distribution<double> draw(0.0,
                                          1.0 / std::sqrt(static_cast<double>(dim)));
    for (double& v : params.prototypes) v = draw(rng);
  }
  return params;
}

TrainResult train(const DatasetManifest& manifest,
                  std::span<const FeatureMap> features,
                  const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  if (features.size() != manifest.records.size()) {
    throw ConfigError("features are not aligned with the manifest");
  }
  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.params = init_prototypes(manifest, features, config, rng);
  if (config.iterations == 0) return result;

  const bool validate =
      split_supports(manifest, Split::kValidation, config.episode) &&
      config.validation_episodes >= 2;
  EvalOptions val_options;
  val_options.episode = config.episode;
  val_options.episodes = config.validation_episodes;
  val_options.seed = config.seed ^ kValidationSeedOffset;
  auto validation_accuracy = [&](const CfaParams& params) {
    return evaluate(manifest, features, Split::kValidation, params, val_options)
        .mean_accuracy;
  };

  if (validate) result.best_validation = validation_accuracy(result.params);

  CfaParams params = result.params;
  AdamState adam;
  AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  ObjectiveOptions objective;
  objective.gamma = config.gamma;
  objective.scale = config.scale;

  std::vector<Episode> batch(config.batch_size);
  std::vector<EpisodeGradient> grads(config.batch_size);
  std::vector<double> mean_grad(params.prototypes.size());
  for (std::size_t iteration = 1; iteration <= config.iterations; ++iteration) {
    for (auto& episode : batch) {
      episode = sample_episode(manifest, Split::kBase, config.episode, rng);
    }
    parallel_for(batch.size(), [&](std::size_t b) {
      grads[b] = episode_objective(gather_features(batch[b], features), params,
                                   objective);
    });

    // Fixed reduction order keeps runs bitwise reproducible.
    std::fill(mean_grad.begin(), mean_grad.end(), 0.0);
    double loss = 0.0;
    for (const auto& g : grads) {
      loss += g.loss.total;
      for (std::size_t j = 0; j < mean_grad.size(); ++j) {
        mean_grad[j] += g.prototypes[j];
      }
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    loss *= inv_batch;
    for (double& g : mean_grad) g *= inv_batch;
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite training loss at iteration " +
                         std::to_string(iteration));
    }
    adam_step(params.prototypes, mean_grad, adam, adam_config);

    CurvePoint point;
    point.iteration = iteration;
    point.loss = loss;
    if (validate && (iteration % config.validation_every == 0 ||
                     iteration == config.iterations)) {
      point.validation_accuracy = validation_accuracy(params);
      if (point.validation_accuracy > result.best_validation) {
        result.best_validation = point.validation_accuracy;
        result.best_iteration = iteration;
        result.params = params;
      }
    }
    result.curve.push_back(point);
    if (observer) observer(point);
  }
  if (!validate) {
    result.params = params;
    result.best_iteration = config.iterations;
  }
  return result;
}

EvalReport summarize(std::span<const double> accuracies) {
  if (accuracies.size() < 2) {
    throw DataError("a report needs at least two episodes");
  }
  const auto n = static_cast<double>(accuracies.size());
  double mean = 0.0;
  for (double a : accuracies) mean += a;
  mean /= n;
  double ss = 0.0;
  for (double a : accuracies) ss += (a - mean) * (a - mean);
  const double stddev = std::sqrt(ss / (n - 1.0));

  EvalReport report;
  report.episodes = accuracies.size();
  report.mean_accuracy = 100.0 * mean;
  report.ci95 = 100.0 * 1.96 * stddev / std::sqrt(n);
  report.per_episode.assign(accuracies.begin(), accuracies.end());
  return report;
}

EvalReport evaluate_with(const DatasetManifest& manifest,
                         std::span<const FeatureMap> features, Split split,
                         const EvalOptions& options,
                         const Embedder& embed_support,
                         const Embedder& embed_query) {
  if (options.episodes < 2) throw ConfigError("evaluation needs >= 2 episodes");
  if (features.size() != manifest.records.size()) {
    throw ConfigError("features are not aligned with the manifest");
  }
  std::mt19937_64 rng(options.seed);
  std::vector<Episode> episodes;
  episodes.reserve(options.episodes);
  for (std::size_t e = 0; e < options.episodes; ++e) {
    episodes.push_back(sample_episode(manifest, split, options.episode, rng));
  }

  std::vector<double> accuracies(episodes.size());
  parallel_for(episodes.size(), [&](std::size_t e) {
    const auto& episode = episodes[e];
    ClassBank bank;
    for (std::size_t c = 0; c < episode.support.size(); ++c) {
      std::vector<FeatureMap> shots;
      for (std::size_t r : episode.support[c]) shots.push_back(features[r]);
      bank.descriptors.push_back(embed_support(shots));
      bank.labels.push_back(episode.class_ids[c]);
    }
    std::size_t correct = 0;
    std::size_t total = 0;
    for (std::size_t c = 0; c < episode.query.size(); ++c) {
      for (std::size_t r : episode.query[c]) {
        const auto query = embed_query(std::span<const FeatureMap>(&features[r], 1));
        if (argmax(similarities(bank, query)) == c) ++correct;
        ++total;
      }
    }
    accuracies[e] = static_cast<double>(correct) / static_cast<double>(total);
  });
  return summarize(accuracies);
}

EvalReport evaluate(const DatasetManifest& manifest,
                    std::span<const FeatureMap> features, Split split,
                    const CfaParams& params, const EvalOptions& options) {
  params.validate();
  const Embedder embed = [&params](std::span<const FeatureMap> shots) {
    return cfa_forward(shots, params).descriptor;
  };
  return evaluate_with(manifest, features, split, options, embed, embed);
}

EvalReport baseline_eval(const DatasetManifest& manifest,
                         std::span<const FeatureMap> features, Split split,
                         const EvalOptions& options) {
  const Embedder embed_support = [](std::span<const FeatureMap> shots) {
    Descriptor mean;
    for (const auto& shot : shots) {
      const auto pooled = mean_pool(std::span<const FeatureMap>(&shot, 1));
      if (mean.values.empty()) mean.values.assign(pooled.size(), 0.0);
      for (std::size_t j = 0; j < pooled.size(); ++j) mean.values[j] += pooled[j];
    }
    l2_normalize(mean.values);
    return mean;
  };
  const Embedder embed_query = [](std::span<const FeatureMap> shots) {
    return mean_pool(shots);
  };
  return evaluate_with(manifest, features, split, options, embed_support,
                       embed_query);
}

void write_loss_curve(const std::vector<CurvePoint>& curve,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "iteration,loss,val_accuracy\n" << std::setprecision(17);
  for (const auto& p : curve) {
    out << p.iteration << ',' << p.loss << ',';
    if (!std::isnan(p.validation_accuracy)) out << p.validation_accuracy;
    out << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "episodes,mean,ci95\n"
      << report.episodes << ',' << std::fixed << std::setprecision(4)
      << report.mean_accuracy << ',' << report.ci95 << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

}  // namespace cfa

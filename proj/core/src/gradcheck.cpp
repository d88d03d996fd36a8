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

#include "cfa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cfa/objective.hpp"

namespace cfa {
namespace {

template <typename T, std::size_t Size>
T pick(const T (&choices)[Size], std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> index(0, Size - 1);
  return choices[index(rng)];
}

FeatureMap random_map(std::size_t channels, std::size_t side,
                      std::mt19937_64& rng) {
  FeatureMap map = FeatureMap::zeros({channels, side, side});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : map.values()) v = normal(rng);
  return map;
}

double error_of(double analytic, double numeric, double floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  static constexpr std::size_t kChannels[] = {4, 8, 16};
  static constexpr std::size_t kSubspaces[] = {1, 2, 4};
  static constexpr std::size_t kPrototypes[] = {1, 2, 3, 5};
  static constexpr std::size_t kSides[] = {1, 2, 3};
  static constexpr std::size_t kShots[] = {1, 2, 3};
  static constexpr double kAlphas[] = {0.5, 2.0, 10.0};

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradcheckReport report;
  for (std::size_t instance = 0; instance < options.instances; ++instance) {
    const std::size_t channels = pick(kChannels, rng);
    std::size_t subspaces = pick(kSubspaces, rng);
    while (channels % subspaces != 0) subspaces /= 2;
    const std::size_t side = pick(kSides, rng);
    const std::size_t shots = pick(kShots, rng);

    CfaParams params = CfaParams::zeros(subspaces, pick(kPrototypes, rng),
                                        channels / subspaces, pick(kAlphas, rng));
    for (double& v : params.prototypes) v = normal(rng);

    EpisodeFeatures episode;
    const std::size_t way = 2 + instance % 2;
    for (std::size_t c = 0; c < way; ++c) {
      auto& support = episode.support.emplace_back();
      for (std::size_t t = 0; t < shots; ++t) {
        support.push_back(random_map(channels, side, rng));
      }
      episode.queries.push_back(random_map(channels, side, rng));
      episode.query_labels.push_back(c);
    }

    ObjectiveOptions objective;
    objective.gamma = 0.05;
    objective.input_gradients = true;
    const auto analytic = episode_objective(episode, params, objective);
    auto loss = [&] {
      return episode_objective_loss(episode, params, objective).total;
    };
    auto probe = [&](double& value, double analytic_entry) {
      const double saved = value;
      value = saved + options.step;
      const double plus = loss();
      value = saved - options.step;
      const double minus = loss();
      value = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      report.max_relative_error =
          std::max(report.max_relative_error,
                   error_of(analytic_entry, numeric, options.absolute_floor));
      ++report.entries;
    };

    for (std::size_t j = 0; j < params.prototypes.size(); ++j) {
      probe(params.prototypes[j], analytic.prototypes[j]);
    }
    for (std::size_t c = 0; c < way; ++c) {
      for (std::size_t t = 0; t < shots; ++t) {
        auto values = episode.support[c][t].values();
        const auto grad = analytic.support_inputs[c][t].values();
        for (std::size_t j = 0; j < values.size(); ++j) probe(values[j], grad[j]);
      }
      auto values = episode.queries[c].values();
      const auto grad = analytic.query_inputs[c].values();
      for (std::size_t j = 0; j < values.size(); ++j) probe(values[j], grad[j]);
    }
    ++report.instances;
  }
  return report;
}

}  // namespace cfa

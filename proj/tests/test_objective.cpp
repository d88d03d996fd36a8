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

#include <random>

#include "cfa/errors.hpp"
#include "cfa/gradcheck.hpp"
#include "cfa/objective.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace cfa;
using doctest::Approx;

namespace {

EpisodeFeatures random_episode(std::size_t way, std::size_t shots,
                               std::size_t queries, std::vector<std::size_t> shape,
                               std::mt19937_64& rng) {
  EpisodeFeatures e;
  for (std::size_t c = 0; c < way; ++c) {
    auto& s = e.support.emplace_back();
    for (std::size_t t = 0; t < shots; ++t) s.push_back(testing::random_map(shape, rng));
    for (std::size_t q = 0; q < queries; ++q) {
      e.queries.push_back(testing::random_map(shape, rng));
      e.query_labels.push_back(c);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("episode objective agrees with the per-query loss components") {
  std::mt19937_64 rng(1);
  const auto episode = random_episode(3, 2, 2, {4, 2, 2}, rng);
  const auto params = testing::random_params(2, 3, 2, 2.0, rng);
  ObjectiveOptions options;
  options.gamma = 0.0002;
  const auto out = episode_objective(episode, params, options);

  ClassBank bank;
  for (std::size_t c = 0; c < 3; ++c) {
    bank.descriptors.push_back(cfa_forward(episode.support[c], params).descriptor);
    bank.labels.push_back(static_cast<int>(c));
  }
  double ce = 0.0;
  for (std::size_t q = 0; q < episode.queries.size(); ++q) {
    const auto query = cfa_forward(std::span(&episode.queries[q], 1), params).descriptor;
    ce += episode_loss(bank, query, episode.query_labels[q], params, 0.0).total;
  }
  ce /= static_cast<double>(episode.queries.size());
  CHECK(out.loss.classification == Approx(ce).epsilon(1e-14));
  CHECK(out.loss.total ==
        Approx(ce + 0.0002 * ortho_penalty(params)).epsilon(1e-14));
  CHECK(episode_objective_loss(episode, params, options).total ==
        Approx(out.loss.total).epsilon(1e-14));
}

TEST_CASE("prototype gradient of the episode loss matches central differences") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const auto episode = random_episode(2 + trial % 2, 1 + trial % 3, 2, {8, 2, 2}, rng);
    auto params = testing::random_params(2, 3, 4, 0.5 + 3.0 * trial, rng);
    ObjectiveOptions options;
    options.gamma = trial % 2 ? 0.0 : 0.01;
    const auto analytic = episode_objective(episode, params, options);
    const auto numeric = testing::central_differences(
        params.prototypes,
        [&] { return episode_objective_loss(episode, params, options).total; }, 1e-4);
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      CHECK(testing::relative_error(analytic.prototypes[j], numeric[j]) < 1e-4);
    }
  }
}

TEST_CASE("input gradients are only produced on request") {
  std::mt19937_64 rng(3);
  const auto episode = random_episode(2, 1, 1, {2, 1, 2}, rng);
  const auto params = testing::random_params(1, 2, 2, 1.0, rng);
  ObjectiveOptions options;
  auto out = episode_objective(episode, params, options);
  CHECK(out.support_inputs.empty());
  CHECK(out.query_inputs.empty());
  options.input_gradients = true;
  out = episode_objective(episode, params, options);
  CHECK(out.support_inputs.size() == 2);
  CHECK(out.query_inputs.size() == 2);
}

TEST_CASE("episode validation") {
  std::mt19937_64 rng(4);
  auto episode = random_episode(2, 1, 1, {2, 1, 2}, rng);
  const auto params = testing::random_params(1, 2, 2, 1.0, rng);
  episode.query_labels[0] = 7;
  CHECK_THROWS_AS(episode_objective(episode, params, {}), ConfigError);
  episode.query_labels.pop_back();
  CHECK_THROWS_AS(episode_objective(episode, params, {}), ConfigError);
}

TEST_CASE("library gradcheck stays below 1e-4") {
  GradcheckOptions options;
  options.seed = 7;
  options.instances = 3;
  const auto report = run_gradcheck(options);
  CHECK(report.instances == 3);
  CHECK(report.entries > 0);
  CHECK(report.max_relative_error < 1e-4);
}

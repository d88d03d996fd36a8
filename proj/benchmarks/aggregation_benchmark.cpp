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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cfa/aggregation.hpp"
#include "cfa/objective.hpp"

namespace {

cfa::FeatureMap random_map(std::size_t channels, std::size_t side,
                           std::mt19937_64& rng) {
  auto map = cfa::FeatureMap::zeros({channels, side, side});
  std::normal_distribution<double> normal;
  for (double& v : map.values()) v = normal(rng);
  return map;
}

cfa::CfaParams random_params(std::size_t n, std::size_t k, std::size_t dim,
                             std::mt19937_64& rng) {
  auto params = cfa::CfaParams::zeros(n, k, dim);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (double& v : params.prototypes) v = normal(rng);
  return params;
}

// Arguments: channels, subspaces, prototypes per subspace.
void BM_Forward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const std::vector<cfa::FeatureMap> shots = {random_map(c, 5, rng)};
  const auto params = random_params(n, k, c / n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfa::cfa_forward(shots, params));
  }
}
BENCHMARK(BM_Forward)->Args({32, 4, 32})->Args({64, 4, 32})->Args({512, 8, 32});

void BM_ForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const std::vector<cfa::FeatureMap> shots = {random_map(c, 5, rng)};
  const auto params = random_params(n, k, c / n, rng);
  std::vector<double> grad(params.descriptor_size(), 1.0);
  for (auto _ : state) {
    auto forward = cfa::cfa_forward(shots, params);
    benchmark::DoNotOptimize(cfa::cfa_backward(forward.tape, grad));
  }
}
BENCHMARK(BM_ForwardBackward)->Args({32, 4, 32})->Args({64, 4, 32});

void BM_SoftAssign(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto k = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 8;
  std::vector<double> x(dim, 0.1);
  const auto params = random_params(1, k, dim, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfa::soft_assign(x, params.centers(0), 100.0));
  }
}
BENCHMARK(BM_SoftAssign)->Arg(8)->Arg(32)->Arg(128);

void BM_Episode(benchmark::State& state) {
  std::mt19937_64 rng(4);
  cfa::EpisodeFeatures episode;
  for (std::size_t c = 0; c < 5; ++c) {
    episode.support.push_back({random_map(32, 4, rng)});
    for (int q = 0; q < 16; ++q) {
      episode.queries.push_back(random_map(32, 4, rng));
      episode.query_labels.push_back(c);
    }
  }
  const auto params = random_params(4, 32, 8, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfa::episode_objective(episode, params, {}));
  }
}
BENCHMARK(BM_Episode);

}  // namespace

BENCHMARK_MAIN();

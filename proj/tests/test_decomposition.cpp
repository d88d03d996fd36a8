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

#include "cfa/decomposition.hpp"
#include "cfa/errors.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace cfa;

TEST_CASE("contiguous split of four channels into two groups") {
  const FeatureMap map({4, 1, 1}, {1.0, 2.0, 3.0, 4.0});
  const auto views = split_channels(map, 2);
  REQUIRE(views.size() == 2);
  CHECK(views[0].features == std::vector<double>{1.0, 2.0});
  CHECK(views[1].features == std::vector<double>{3.0, 4.0});
  CHECK(views[1].index == 1);
}

TEST_CASE("N = 1 keeps every channel in one view") {
  std::mt19937_64 rng(1);
  const auto map = testing::random_map({3, 2, 2}, rng);
  const auto views = split_channels(map, 1);
  REQUIRE(views.size() == 1);
  CHECK(views[0].dim == 3);
  CHECK(views[0].locations == 4);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(views[0].at(c, i) == map.at(c, i));
  }
}

TEST_CASE("one channel per group at C = N = 64") {
  std::mt19937_64 rng(2);
  const auto map = testing::random_map({64, 2, 3}, rng);
  const auto views = split_channels(map, 64);
  REQUIRE(views.size() == 64);
  for (const auto& v : views) {
    CHECK(v.dim == 1);
    CHECK(v.locations == 6);
  }
}

TEST_CASE("rank-4 maps flatten time and space into locations") {
  std::mt19937_64 rng(3);
  const auto map = testing::random_map({4, 3, 2, 2}, rng);
  const auto views = split_channels(map, 2);
  CHECK(views[0].locations == 12);
  CHECK(views[1].at(1, 7) == map.at(3, 7));
}

TEST_CASE("split then merge reconstructs the input exactly") {
  std::mt19937_64 rng(4);
  for (std::size_t trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const std::size_t c = n * (1 + trial % 3);
    std::vector<std::size_t> shape = {c, 1 + trial % 3, 1 + trial % 2};
    if (trial % 5 == 0) shape.push_back(2);
    const auto map = testing::random_map(shape, rng);
    const auto views = split_channels(map, n);
    CHECK(merge_channels(views, map.shape()) == map);
  }
}

TEST_CASE("N must divide C") {
  const FeatureMap map({6, 1, 1}, std::vector<double>(6, 0.0));
  CHECK_THROWS_AS(split_channels(map, 4), ConfigError);
  CHECK_THROWS_AS(split_channels(map, 0), ConfigError);
}

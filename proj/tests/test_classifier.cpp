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

#include <cmath>
#include <random>

#include "cfa/classifier.hpp"
#include "cfa/errors.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace cfa;
using doctest::Approx;

namespace {

Descriptor unit(std::size_t size, std::size_t hot) {
  Descriptor d;
  d.values.assign(size, 0.0);
  d.values[hot] = 1.0;
  return d;
}

ClassBank one_hot_bank(std::size_t classes) {
  ClassBank bank;
  for (std::size_t c = 0; c < classes; ++c) {
    bank.descriptors.push_back(unit(classes, c));
    bank.labels.push_back(static_cast<int>(c));
  }
  return bank;
}

Descriptor normalized(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  for (double& x : v) x /= std::sqrt(n);
  return Descriptor{v};
}

}  // namespace

TEST_CASE("classify") {
  SUBCASE("query equal to one class, orthogonal to the rest") {
    const auto bank = one_hot_bank(5);
    const auto p = classify(bank, unit(5, 0));
    CHECK(p[0] == Approx(0.40460967519168966482));  // e / (e + 4)
    for (int c = 1; c < 5; ++c) CHECK(p[0] > p[c]);
  }
  SUBCASE("equal similarities give a uniform distribution") {
    const auto bank = one_hot_bank(4);
    const auto p = classify(bank, normalized({1.0, 1.0, 1.0, 1.0}));
    for (double v : p) CHECK(v == Approx(0.25));
  }
  SUBCASE("two classes with similarities 0.8 and 0.2") {
    ClassBank bank;
    bank.descriptors = {unit(2, 0), unit(2, 1)};
    bank.labels = {0, 1};
    // The query is not unit norm here; only the similarities matter.
    const auto p = classify(bank, Descriptor{{0.8, 0.2}});
    CHECK(p[0] == Approx(0.64565630622579544783).epsilon(1e-14));
    CHECK(p[1] == Approx(0.35434369377420455217).epsilon(1e-14));
  }
  SUBCASE("output is a probability vector; shift invariance of the logits") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 100; ++t) {
      ClassBank bank;
      for (int c = 0; c < 5; ++c) {
        std::vector<double> v(6);
        for (auto& x : v) x = normal(rng);
        bank.descriptors.push_back(normalized(v));
        bank.labels.push_back(c);
      }
      std::vector<double> q(6);
      for (auto& x : q) x = normal(rng);
      const auto query = normalized(q);
      const auto p = classify(bank, query, 1.0 + t % 3);
      double s = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  SUBCASE("argmax ties go to the lowest index") {
    const std::vector<double> v = {0.2, 0.7, 0.7, 0.1};
    CHECK(argmax(v) == 1);
  }
  SUBCASE("bank validation") {
    ClassBank bank = one_hot_bank(1);
    CHECK_THROWS_AS(bank.validate(), ConfigError);
    bank = one_hot_bank(3);
    bank.descriptors[1].values[1] = 2.0;
    CHECK_THROWS_AS(bank.validate(), ConfigError);
  }
}

TEST_CASE("cross_entropy") {
  CHECK(cross_entropy(std::vector<double>{0.0, 1.0, 0.0}, 1) == 0.0);
  CHECK(std::abs(cross_entropy(std::vector<double>(5, 0.2), 3) - std::log(5.0)) < 1e-12);
  CHECK(cross_entropy(std::vector<double>{1e-20, 1.0}, 0) == Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.5, 0.5}, 2), ConfigError);
}

TEST_CASE("ortho_penalty") {
  SUBCASE("orthonormal rows give zero") {
    auto params = CfaParams::zeros(2, 2, 3);
    params.prototypes = {1, 0, 0, 0, 1, 0,  //
                         0, 0.6, 0.8, 0, -0.8, 0.6};
    CHECK(ortho_penalty(params) == 0.0);
  }
  SUBCASE("K = 1 unit prototypes give zero") {
    auto params = CfaParams::zeros(3, 1, 2);
    params.prototypes = {1, 0, 0.6, 0.8, 0, -1};
    CHECK(ortho_penalty(params) == 0.0);
  }
  SUBCASE("duplicate unit prototype gives 2") {
    auto params = CfaParams::zeros(2, 2, 2);
    params.prototypes = {0.6, 0.8, 0.6, 0.8,  //
                         1, 0, 0, 1};
    CHECK(ortho_penalty(params) == Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("invariant under row permutation within a subspace") {
    std::mt19937_64 rng(3);
    auto params = testing::random_params(2, 4, 3, 1.0, rng);
    auto permuted = params;
    const std::size_t perm[] = {2, 0, 3, 1};
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t j = 0; j < 3; ++j) {
        permuted.prototypes[k * 3 + j] = params.prototypes[perm[k] * 3 + j];
      }
    }
    CHECK(ortho_penalty(permuted) == Approx(ortho_penalty(params)).epsilon(1e-14));
  }
  SUBCASE("gradient matches central differences away from kinks") {
    std::mt19937_64 rng(5);
    auto params = testing::random_params(2, 3, 4, 1.0, rng);
    const auto analytic = ortho_penalty_grad(params);
    const auto numeric = testing::central_differences(
        params.prototypes, [&] { return ortho_penalty(params); }, 1e-6);
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      CHECK(testing::relative_error(analytic[j], numeric[j]) < 1e-6);
    }
  }
  SUBCASE("subgradient is zero where a Gram entry meets its target") {
    // Orthonormal rows: every entry of C C^T - I is exactly zero.
    auto params = CfaParams::zeros(1, 2, 2);
    params.prototypes = {1, 0, 0, 1};
    for (double g : ortho_penalty_grad(params)) CHECK(g == 0.0);
  }
}

TEST_CASE("episode_loss") {
  const auto bank = one_hot_bank(3);
  const auto query = normalized({0.9, 0.3, 0.1});
  std::mt19937_64 rng(6);
  const auto params = testing::random_params(2, 3, 2, 100.0, rng);

  SUBCASE("gamma = 0 is the cross-entropy") {
    const auto loss = episode_loss(bank, query, 0, params, 0.0);
    CHECK(loss.total == cross_entropy(classify(bank, query), 0));
  }
  SUBCASE("orthonormal prototypes add nothing for any gamma") {
    auto ortho = CfaParams::zeros(1, 2, 2);
    ortho.prototypes = {0, 1, 1, 0};
    const auto loss = episode_loss(bank, query, 2, ortho, 3.5);
    CHECK(loss.total == loss.classification);
  }
  SUBCASE("gamma = 0.0002 is the component sum") {
    const auto loss = episode_loss(bank, query, 1, params, 0.0002);
    const double expected =
        cross_entropy(classify(bank, query), 1) + 0.0002 * ortho_penalty(params);
    CHECK(loss.total == Approx(expected).epsilon(1e-15));
    CHECK(loss.gamma == 0.0002);
  }
  SUBCASE("negative gamma is rejected") {
    CHECK_THROWS_AS(episode_loss(bank, query, 0, params, -1.0), ConfigError);
  }
}

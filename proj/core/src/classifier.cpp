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

#include "cfa/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfa/errors.hpp"

namespace cfa {
namespace {

constexpr double kUnitNormTolerance = 1e-9;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Gram(C_n) - Id for one subspace, K x K.
std::vector<double> gram_residual(const CfaParams& params, std::size_t n) {
  const std::size_t k_count = params.prototypes_per_subspace;
  const std::size_t dim = params.subspace_dim;
  const auto c = params.centers(n);
  std::vector<double> g(k_count * k_count);
  for (std::size_t a = 0; a < k_count; ++a) {
    for (std::size_t b = 0; b < k_count; ++b) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += c[a * dim + j] * c[b * dim + j];
      g[a * k_count + b] = acc - (a == b ? 1.0 : 0.0);
    }
  }
  return g;
}

}  // namespace

void ClassBank::validate() const {
  if (descriptors.size() < 2) {
    throw ConfigError("a class bank needs at least two classes");
  }
  if (labels.size() != descriptors.size()) {
    throw ConfigError("class bank labels and descriptors differ in count");
  }
  for (const auto& d : descriptors) {
    if (d.size() != descriptors.front().size()) {
      throw ConfigError("class descriptors differ in length");
    }
    double sum = 0.0;
    for (double v : d.values) sum += v * v;
    if (std::abs(std::sqrt(sum) - 1.0) > kUnitNormTolerance) {
      throw ConfigError("class descriptors must be L2-normalized");
    }
  }
}

std::vector<double> similarities(const ClassBank& bank,
                                 const Descriptor& query) {
  std::vector<double> sims(bank.size());
  for (std::size_t c = 0; c < bank.size(); ++c) {
    const auto& d = bank.descriptors[c];
    if (d.size() != query.size()) {
      throw ConfigError("query and class descriptors differ in length");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) acc += d[j] * query[j];
    sims[c] = acc;
  }
  return sims;
}

std::vector<double> classify(const ClassBank& bank, const Descriptor& query,
                             double scale) {
  auto probs = similarities(bank, query);
  const double top = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(scale * (p - top));
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double cross_entropy(std::span<const double> probs, std::size_t true_class) {
  if (true_class >= probs.size()) {
    throw ConfigError("true class index " + std::to_string(true_class) +
                      " is out of range");
  }
  return -std::log(std::max(probs[true_class], kProbabilityFloor));
}

double ortho_penalty(const CfaParams& params) {
  double total = 0.0;
  for (std::size_t n = 0; n < params.subspaces; ++n) {
    for (double v : gram_residual(params, n)) total += std::abs(v);
  }
  return total;
}

std::vector<double> ortho_penalty_grad(const CfaParams& params) {
  const std::size_t k_count = params.prototypes_per_subspace;
  const std::size_t dim = params.subspace_dim;
  std::vector<double> grad(params.prototypes.size(), 0.0);
  for (std::size_t n = 0; n < params.subspaces; ++n) {
    const auto g = gram_residual(params, n);
    const auto c = params.centers(n);
    double* out = grad.data() + n * params.block_size();
    for (std::size_t a = 0; a < k_count; ++a) {
      for (std::size_t b = 0; b < k_count; ++b) {
        const double s = 2.0 * sign(g[a * k_count + b]);
        if (s == 0.0) continue;
        for (std::size_t j = 0; j < dim; ++j) out[a * dim + j] += s * c[b * dim + j];
      }
    }
  }
  return grad;
}

LossBreakdown episode_loss(const ClassBank& bank, const Descriptor& query,
                           std::size_t true_class, const CfaParams& params,
                           double gamma, double scale) {
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  bank.validate();
  LossBreakdown loss;
  loss.classification = cross_entropy(classify(bank, query, scale), true_class);
  loss.orthogonality = ortho_penalty(params);
  loss.gamma = gamma;
  loss.total = loss.classification + gamma * loss.orthogonality;
  return loss;
}

}  // namespace cfa

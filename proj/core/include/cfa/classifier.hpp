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
#include <span>
#include <vector>

#include "cfa/aggregation.hpp"

namespace cfa {

inline constexpr double kProbabilityFloor = 1e-12;

/// One L2-normalized descriptor per episode class.
struct ClassBank {
  std::vector<Descriptor> descriptors;
  std::vector<int> labels;

  std::size_t size() const noexcept { return descriptors.size(); }
  /// Throws ConfigError unless there are >= 2 classes of equal, unit-norm
  /// descriptors with matching labels.
  void validate() const;
};

/// Cosine similarity of the query to every class descriptor. Both sides are
/// unit-norm, so this is a plain dot product.
std::vector<double> similarities(const ClassBank& bank, const Descriptor& query);

/// Softmax of `scale` * cosine similarity over the classes of the bank.
std::vector<double> classify(const ClassBank& bank, const Descriptor& query,
                             double scale = 1.0);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// -log(max(probs[true_class], kProbabilityFloor)).
double cross_entropy(std::span<const double> probs, std::size_t true_class);

/// sum_n sum_{a,b} |(C_n C_n^T - Id_K)_{ab}| with C_n the K x dim matrix of
/// subspace-n prototypes.
double ortho_penalty(const CfaParams& params);

/// Subgradient of ortho_penalty w.r.t. the prototypes: 2 S_n C_n where
/// S_n = sign(C_n C_n^T - Id_K) and sign(0) = 0.
std::vector<double> ortho_penalty_grad(const CfaParams& params);

struct LossBreakdown {
  double classification = 0.0;
  double orthogonality = 0.0;
  double gamma = 0.0;
  double total = 0.0;
};

LossBreakdown episode_loss(const ClassBank& bank, const Descriptor& query,
                           std::size_t true_class, const CfaParams& params,
                           double gamma, double scale = 1.0);

}  // namespace cfa

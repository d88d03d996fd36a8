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
#include <vector>

#include "cfa/aggregation.hpp"
#include "cfa/classifier.hpp"
#include "cfa/tensor_io.hpp"

namespace cfa {

/// Feature maps of one episode. support[c] holds the Y shots of class c;
/// query_labels index into support.
struct EpisodeFeatures {
  std::vector<std::vector<FeatureMap>> support;
  std::vector<FeatureMap> queries;
  std::vector<std::size_t> query_labels;
};

struct ObjectiveOptions {
  double gamma = 0.0;
  double scale = 1.0;
  bool input_gradients = false;
};

struct EpisodeGradient {
  /// classification is the mean cross-entropy over the queries.
  LossBreakdown loss;
  std::size_t correct = 0;  // queries whose argmax class is right
  std::vector<double> prototypes;
  /// Filled only with ObjectiveOptions::input_gradients.
  std::vector<std::vector<FeatureMap>> support_inputs;
  std::vector<FeatureMap> query_inputs;
};

/// Training objective of one episode:
///   mean_q CE(classify(bank, I_q), label_q) + gamma * ortho_penalty
/// where the bank holds one multi-shot descriptor per class. Returns the loss
/// and its exact gradient w.r.t. the prototypes (and optionally every input).
EpisodeGradient episode_objective(const EpisodeFeatures& episode,
                                  const CfaParams& params,
                                  const ObjectiveOptions& options);

/// Loss only; cheaper than episode_objective and used by the finite
/// difference checks.
LossBreakdown episode_objective_loss(const EpisodeFeatures& episode,
                                     const CfaParams& params,
                                     const ObjectiveOptions& options);

}  // namespace cfa

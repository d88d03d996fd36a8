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

#include "cfa/objective.hpp"

#include <cmath>
#include <string>

#include "cfa/errors.hpp"

namespace cfa {
namespace {

void check_episode(const EpisodeFeatures& episode) {
  if (episode.support.size() < 2) {
    throw ConfigError("an episode needs at least two classes");
  }
  if (episode.queries.empty()) {
    throw ConfigError("an episode needs at least one query");
  }
  if (episode.query_labels.size() != episode.queries.size()) {
    throw ConfigError("query labels and queries differ in count");
  }
  for (std::size_t label : episode.query_labels) {
    if (label >= episode.support.size()) {
      throw ConfigError("query label " + std::to_string(label) +
                        " is out of range");
    }
  }
}

ClassBank build_bank(const std::vector<ForwardResult>& classes) {
  ClassBank bank;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    bank.descriptors.push_back(classes[c].descriptor);
    bank.labels.push_back(static_cast<int>(c));
  }
  return bank;
}

void add_scaled(std::vector<double>& into, const std::vector<double>& from,
                double scale) {
  for (std::size_t j = 0; j < into.size(); ++j) into[j] += scale * from[j];
}

}  // namespace

EpisodeGradient episode_objective(const EpisodeFeatures& episode,
                                  const CfaParams& params,
                                  const ObjectiveOptions& options) {
  check_episode(episode);
  if (!(options.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");

  std::vector<ForwardResult> classes;
  classes.reserve(episode.support.size());
  for (const auto& shots : episode.support) {
    classes.push_back(cfa_forward(shots, params));
  }
  const ClassBank bank = build_bank(classes);
  const std::size_t width = params.descriptor_size();
  const std::size_t q_count = episode.queries.size();
  const double inv_queries = 1.0 / static_cast<double>(q_count);

  EpisodeGradient out;
  out.prototypes.assign(params.prototypes.size(), 0.0);
  std::vector<std::vector<double>> class_grads(
      classes.size(), std::vector<double>(width, 0.0));
  if (options.input_gradients) out.query_inputs.reserve(q_count);

  double ce_sum = 0.0;
  for (std::size_t q = 0; q < q_count; ++q) {
    const FeatureMap& query = episode.queries[q];
    const std::size_t label = episode.query_labels[q];
    auto forward = cfa_forward(std::span<const FeatureMap>(&query, 1), params);
    const auto probs = classify(bank, forward.descriptor, options.scale);
    ce_sum += cross_entropy(probs, label);
    if (argmax(probs) == label) ++out.correct;

    // dCE/dlogit_c = p_c - [c == label]; zero once the floor clamps.
    std::vector<double> grad_query(width, 0.0);
    if (probs[label] > kProbabilityFloor) {
      for (std::size_t c = 0; c < classes.size(); ++c) {
        const double g = inv_queries * options.scale *
                         (probs[c] - (c == label ? 1.0 : 0.0));
        add_scaled(grad_query, bank.descriptors[c].values, g);
        add_scaled(class_grads[c], forward.descriptor.values, g);
      }
    }
    auto grads = cfa_backward(forward.tape, grad_query);
    add_scaled(out.prototypes, grads.prototypes, 1.0);
    if (options.input_gradients) {
      out.query_inputs.push_back(std::move(grads.inputs.front()));
    }
  }

  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto grads = cfa_backward(classes[c].tape, class_grads[c]);
    add_scaled(out.prototypes, grads.prototypes, 1.0);
    if (options.input_gradients) {
      out.support_inputs.push_back(std::move(grads.inputs));
    }
  }

  out.loss.classification = ce_sum * inv_queries;
  out.loss.gamma = options.gamma;
  out.loss.orthogonality = ortho_penalty(params);
  out.loss.total =
      out.loss.classification + options.gamma * out.loss.orthogonality;
  if (options.gamma > 0.0) {
    add_scaled(out.prototypes, ortho_penalty_grad(params), options.gamma);
  }
  if (!std::isfinite(out.loss.total)) {
    throw NumericError("episode loss is not finite");
  }
  return out;
}

LossBreakdown episode_objective_loss(const EpisodeFeatures& episode,
                                     const CfaParams& params,
                                     const ObjectiveOptions& options) {
  check_episode(episode);
  ClassBank bank;
  for (std::size_t c = 0; c < episode.support.size(); ++c) {
    bank.descriptors.push_back(cfa_forward(episode.support[c], params).descriptor);
    bank.labels.push_back(static_cast<int>(c));
  }
  double ce_sum = 0.0;
  for (std::size_t q = 0; q < episode.queries.size(); ++q) {
    const auto query = cfa_forward(
        std::span<const FeatureMap>(&episode.queries[q], 1), params);
    ce_sum += cross_entropy(classify(bank, query.descriptor, options.scale),
                            episode.query_labels[q]);
  }
  LossBreakdown loss;
  loss.classification = ce_sum / static_cast<double>(episode.queries.size());
  loss.gamma = options.gamma;
  loss.orthogonality = ortho_penalty(params);
  loss.total = loss.classification + options.gamma * loss.orthogonality;
  return loss;
}

}  // namespace cfa

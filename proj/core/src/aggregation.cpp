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

#include "cfa/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfa/errors.hpp"

namespace cfa {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

void soft_assign_into(std::span<const double> x,
                      std::span<const double> centers, double alpha,
                      std::span<double> weights) {
  const std::size_t dim = x.size();
  const std::size_t k_count = weights.size();
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < k_count; ++k) {
    weights[k] = squared_distance(x, centers.subspan(k * dim, dim));
    min_dist = std::min(min_dist, weights[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    weights[k] = std::exp(-alpha * (weights[k] - min_dist));
    total += weights[k];
  }
  for (std::size_t k = 0; k < k_count; ++k) weights[k] /= total;
}

// Adds sum_i w_k(x_i) (x_i - c_k) for one view into `block` (K x dim) and
// optionally records the weights (L x K).
void accumulate_view(const SubspaceView& view, std::span<const double> centers,
                     double alpha, std::size_t k_count, std::span<double> block,
                     std::span<double> weights_out) {
  const std::size_t dim = view.dim;
  std::vector<double> weights(k_count);
  for (std::size_t i = 0; i < view.locations; ++i) {
    const auto x = view.feature(i);
    soft_assign_into(x, centers, alpha, weights);
    for (std::size_t k = 0; k < k_count; ++k) {
      const double w = weights[k];
      const double* c = centers.data() + k * dim;
      double* v = block.data() + k * dim;
      for (std::size_t j = 0; j < dim; ++j) v[j] += w * (x[j] - c[j]);
    }
    if (!weights_out.empty()) {
      std::copy(weights.begin(), weights.end(),
                weights_out.begin() + static_cast<std::ptrdiff_t>(i * k_count));
    }
  }
}

void check_shots(std::span<const FeatureMap> shots) {
  if (shots.empty()) throw ConfigError("at least one shot is required");
  for (const auto& shot : shots) {
    if (shot.shape() != shots.front().shape()) {
      throw ConfigError("all shots must share one shape");
    }
  }
}

}  // namespace

CfaParams CfaParams::zeros(std::size_t subspaces, std::size_t prototypes,
                           std::size_t dim, double alpha) {
  CfaParams params;
  params.subspaces = subspaces;
  params.prototypes_per_subspace = prototypes;
  params.subspace_dim = dim;
  params.alpha = alpha;
  params.prototypes.assign(subspaces * prototypes * dim, 0.0);
  return params;
}

void CfaParams::validate() const {
  if (subspaces == 0 || prototypes_per_subspace == 0 || subspace_dim == 0) {
    throw ConfigError("N, K and subspace dimension must be positive");
  }
  if (prototypes.size() != subspaces * prototypes_per_subspace * subspace_dim) {
    throw ConfigError("prototype bank has " +
                      std::to_string(prototypes.size()) + " entries, expected " +
                      std::to_string(subspaces * prototypes_per_subspace *
                                     subspace_dim));
  }
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError("alpha must be finite and non-negative");
  }
  for (double v : prototypes) {
    if (!std::isfinite(v)) throw ConfigError("prototype entries must be finite");
  }
}

std::vector<double> soft_assign(std::span<const double> x,
                                std::span<const double> centers, double alpha) {
  if (x.empty() || centers.empty() || centers.size() % x.size() != 0) {
    throw ConfigError("centers must be a non-empty K x dim matrix");
  }
  std::vector<double> weights(centers.size() / x.size());
  soft_assign_into(x, centers, alpha, weights);
  return weights;
}

std::vector<double> aggregate_subspace(std::span<const SubspaceView> views,
                                       std::span<const double> centers,
                                       double alpha) {
  if (views.empty()) throw ConfigError("at least one shot is required");
  const std::size_t dim = views.front().dim;
  const std::size_t locations = views.front().locations;
  for (const auto& view : views) {
    if (view.dim != dim || view.locations != locations) {
      throw ConfigError("shot shape mismatch within a subspace");
    }
  }
  if (dim == 0 || centers.empty() || centers.size() % dim != 0) {
    throw ConfigError("centers must be a non-empty K x dim matrix");
  }
  const std::size_t k_count = centers.size() / dim;
  std::vector<double> block(k_count * dim, 0.0);
  for (const auto& view : views) {
    std::vector<double> shot(k_count * dim, 0.0);
    accumulate_view(view, centers, alpha, k_count, shot, {});
    for (std::size_t j = 0; j < block.size(); ++j) block[j] += shot[j];
  }
  const double inv_shots = 1.0 / static_cast<double>(views.size());
  for (double& v : block) v *= inv_shots;
  return block;
}

double l2_normalize(std::span<double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  const double norm = std::sqrt(sum);
  if (!(norm >= kDegenerateNorm)) {
    throw DegenerateDescriptor("vector norm " + std::to_string(norm) +
                               " is too small to normalize");
  }
  for (double& v : values) v /= norm;
  return norm;
}

ForwardResult cfa_forward(std::span<const FeatureMap> shots,
                          const CfaParams& params) {
  params.validate();
  check_shots(shots);
  if (shots.front().channels() != params.channels()) {
    throw ConfigError("input has " + std::to_string(shots.front().channels()) +
                      " channels, prototypes expect " +
                      std::to_string(params.channels()));
  }

  AggregationTape tape;
  tape.shots = shots.size();
  tape.subspaces = params.subspaces;
  tape.prototypes = params.prototypes_per_subspace;
  tape.dim = params.subspace_dim;
  tape.locations = shots.front().locations();
  tape.alpha = params.alpha;
  tape.intra_normalize = params.intra_normalize;
  tape.input_shape = shots.front().shape();
  tape.centers = params.prototypes;

  const std::size_t n_count = tape.subspaces;
  const std::size_t k_count = tape.prototypes;
  const std::size_t block = params.block_size();
  tape.views.reserve(tape.shots * n_count);
  for (const auto& shot : shots) {
    auto views = split_channels(shot, n_count);
    for (auto& v : views) tape.views.push_back(std::move(v));
  }
  tape.weights.assign(tape.shots * n_count * tape.locations * k_count, 0.0);
  tape.raw.assign(params.descriptor_size(), 0.0);

  const double inv_shots = 1.0 / static_cast<double>(tape.shots);
  std::vector<double> shot_block(block);
  for (std::size_t n = 0; n < n_count; ++n) {
    const auto centers = params.centers(n);
    auto out = std::span<double>(tape.raw).subspan(n * block, block);
    for (std::size_t t = 0; t < tape.shots; ++t) {
      std::fill(shot_block.begin(), shot_block.end(), 0.0);
      const std::size_t slot = t * n_count + n;
      auto weights = std::span<double>(tape.weights)
                         .subspan(slot * tape.locations * k_count,
                                  tape.locations * k_count);
      accumulate_view(tape.views[slot], centers, params.alpha, k_count,
                      shot_block, weights);
      for (std::size_t j = 0; j < block; ++j) out[j] += shot_block[j];
    }
    for (double& v : out) v *= inv_shots;
  }

  tape.normalized_input = tape.raw;
  if (tape.intra_normalize) {
    tape.block_norms.assign(n_count, 0.0);
    for (std::size_t n = 0; n < n_count; ++n) {
      auto part =
          std::span<double>(tape.normalized_input).subspan(n * block, block);
      const double norm = std::sqrt(dot(part, part));
      tape.block_norms[n] = norm;
      if (norm >= kDegenerateNorm) {
        for (double& v : part) v /= norm;
      } else {
        std::fill(part.begin(), part.end(), 0.0);
      }
    }
  }

  tape.descriptor = tape.normalized_input;
  tape.norm = l2_normalize(tape.descriptor);

  ForwardResult result;
  result.descriptor.values = tape.descriptor;
  result.tape = std::move(tape);
  return result;
}

GradBundle cfa_backward(const AggregationTape& tape,
                        std::span<const double> grad_out) {
  if (grad_out.size() != tape.descriptor.size()) {
    throw ConfigError("gradient has " + std::to_string(grad_out.size()) +
                      " entries, descriptor has " +
                      std::to_string(tape.descriptor.size()));
  }
  const std::size_t n_count = tape.subspaces;
  const std::size_t k_count = tape.prototypes;
  const std::size_t dim = tape.dim;
  const std::size_t block = k_count * dim;

  // Through I = z / |z|.
  const double projection = dot(grad_out, tape.descriptor);
  std::vector<double> grad_raw(grad_out.size());
  for (std::size_t j = 0; j < grad_raw.size(); ++j) {
    grad_raw[j] = (grad_out[j] - tape.descriptor[j] * projection) / tape.norm;
  }

  if (tape.intra_normalize) {
    for (std::size_t n = 0; n < n_count; ++n) {
      auto g = std::span<double>(grad_raw).subspan(n * block, block);
      const double norm = tape.block_norms[n];
      if (norm < kDegenerateNorm) {
        std::fill(g.begin(), g.end(), 0.0);
        continue;
      }
      const auto z = std::span<const double>(tape.normalized_input)
                         .subspan(n * block, block);
      const double p = dot(g, z);
      for (std::size_t j = 0; j < block; ++j) g[j] = (g[j] - z[j] * p) / norm;
    }
  }

  GradBundle grads;
  grads.prototypes.assign(tape.centers.size(), 0.0);
  grads.inputs.reserve(tape.shots);
  for (std::size_t t = 0; t < tape.shots; ++t) {
    grads.inputs.push_back(FeatureMap::zeros(tape.input_shape));
  }

  const double inv_shots = 1.0 / static_cast<double>(tape.shots);
  const double two_alpha = 2.0 * tape.alpha;
  std::vector<double> s(k_count);
  std::vector<double> q(k_count);
  std::vector<double> residual(k_count * dim);
  std::vector<double> dx(dim);

  for (std::size_t n = 0; n < n_count; ++n) {
    const auto centers =
        std::span<const double>(tape.centers).subspan(n * block, block);
    const auto h = std::span<const double>(grad_raw).subspan(n * block, block);
    auto grad_c = std::span<double>(grads.prototypes).subspan(n * block, block);

    for (std::size_t t = 0; t < tape.shots; ++t) {
      const std::size_t slot = t * n_count + n;
      const auto& view = tape.views[slot];
      auto& grad_x = grads.inputs[t];
      for (std::size_t i = 0; i < tape.locations; ++i) {
        const auto x = view.feature(i);
        const double* w =
            tape.weights.data() + (slot * tape.locations + i) * k_count;

        // s_k = dL/dw_k, then q_k = dL/d(logit_k) through the softmax.
        double s_mean = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < dim; ++j) {
            residual[k * dim + j] = x[j] - centers[k * dim + j];
            acc += h[k * dim + j] * residual[k * dim + j];
          }
          s[k] = acc * inv_shots;
          s_mean += w[k] * s[k];
        }
        for (std::size_t k = 0; k < k_count; ++k) q[k] = w[k] * (s[k] - s_mean);

        // logit_k = -alpha |x - c_k|^2.
        std::fill(dx.begin(), dx.end(), 0.0);
        for (std::size_t k = 0; k < k_count; ++k) {
          const double direct = w[k] * inv_shots;
          const double through_weight = two_alpha * q[k];
          for (std::size_t j = 0; j < dim; ++j) {
            const double r = residual[k * dim + j];
            const double hk = h[k * dim + j];
            dx[j] += direct * hk - through_weight * r;
            grad_c[k * dim + j] += -direct * hk + through_weight * r;
          }
        }
        for (std::size_t j = 0; j < dim; ++j) {
          grad_x.at(n * dim + j, i) += dx[j];
        }
      }
    }
  }
  return grads;
}

Descriptor mean_pool(std::span<const FeatureMap> shots) {
  check_shots(shots);
  const std::size_t channels = shots.front().channels();
  const std::size_t locations = shots.front().locations();
  Descriptor pooled;
  pooled.values.assign(channels, 0.0);
  for (const auto& shot : shots) {
    for (std::size_t c = 0; c < channels; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < locations; ++i) sum += shot.at(c, i);
      pooled.values[c] += sum;
    }
  }
  const double scale = 1.0 / static_cast<double>(shots.size() * locations);
  for (double& v : pooled.values) v *= scale;
  l2_normalize(pooled.values);
  return pooled;
}

}  // namespace cfa

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

#include "cfa/decomposition.hpp"
#include "cfa/tensor_io.hpp"

namespace cfa {

inline constexpr double kDefaultAlpha = 100.0;
inline constexpr std::size_t kDefaultPrototypes = 32;
/// Vectors with an L2 norm below this are treated as degenerate.
inline constexpr double kDegenerateNorm = 1e-12;

/// Learnable prototype bank: `subspaces` groups of `prototypes_per_subspace`
/// centers, each of dimension `subspace_dim`, stored as
/// prototypes[(n * K + k) * dim + j].
struct CfaParams {
  std::size_t subspaces = 1;
  std::size_t prototypes_per_subspace = kDefaultPrototypes;
  std::size_t subspace_dim = 0;
  double alpha = kDefaultAlpha;
  /// Normalize each subspace block before the final L2 normalization.
  bool intra_normalize = false;
  std::vector<double> prototypes;

  static CfaParams zeros(std::size_t subspaces, std::size_t prototypes,
                         std::size_t dim, double alpha = kDefaultAlpha);

  std::size_t channels() const noexcept { return subspaces * subspace_dim; }
  std::size_t descriptor_size() const noexcept {
    return channels() * prototypes_per_subspace;
  }
  std::size_t block_size() const noexcept {
    return prototypes_per_subspace * subspace_dim;
  }

  std::span<const double> centers(std::size_t n) const {
    return std::span<const double>(prototypes).subspan(n * block_size(),
                                                       block_size());
  }
  std::span<double> centers(std::size_t n) {
    return std::span<double>(prototypes).subspan(n * block_size(),
                                                 block_size());
  }

  /// Throws ConfigError on inconsistent sizes, negative/non-finite alpha or
  /// non-finite prototype entries.
  void validate() const;
};

/// L2-normalized image- or class-level representation.
struct Descriptor {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Softmax over -alpha * squared distance to each of the K centers
/// (`centers` is K x dim, row-major). The minimum distance is subtracted
/// before exponentiation, so large alpha cannot overflow.
std::vector<double> soft_assign(std::span<const double> x,
                                std::span<const double> centers, double alpha);

/// Residual aggregation of one subspace over Y shots:
///   v_k = 1/Y sum_t sum_i w_k(x_ti) (x_ti - c_k),  returned as [v_1; ...; v_K].
std::vector<double> aggregate_subspace(std::span<const SubspaceView> views,
                                       std::span<const double> centers,
                                       double alpha);

/// Everything cfa_backward needs. Produced only by cfa_forward.
struct AggregationTape {
  std::size_t shots = 0;
  std::size_t subspaces = 0;
  std::size_t prototypes = 0;
  std::size_t dim = 0;
  std::size_t locations = 0;
  double alpha = 0.0;
  bool intra_normalize = false;
  std::vector<std::size_t> input_shape;
  std::vector<double> centers;      // snapshot of CfaParams::prototypes
  std::vector<SubspaceView> views;  // views[t * subspaces + n]
  std::vector<double> weights;      // [((t * N + n) * L + i) * K + k]
  std::vector<double> raw;          // concatenated V_n before any normalization
  std::vector<double> block_norms;  // per subspace, intra_normalize only
  std::vector<double> normalized_input;  // vector fed to the final L2 step
  double norm = 0.0;
  std::vector<double> descriptor;
};

struct ForwardResult {
  Descriptor descriptor;
  AggregationTape tape;
};

/// Full module: split channels, aggregate every subspace over all shots,
/// concatenate and L2-normalize. Throws ConfigError on shape problems and
/// DegenerateDescriptor when the concatenated vector has zero norm.
ForwardResult cfa_forward(std::span<const FeatureMap> shots,
                          const CfaParams& params);

struct GradBundle {
  std::vector<double> prototypes;   // same layout as CfaParams::prototypes
  std::vector<FeatureMap> inputs;   // one per shot, same shape as the input
};

/// Exact gradients of <grad_out, descriptor> through the L2 normalization,
/// the residuals and the soft-assignment weights.
GradBundle cfa_backward(const AggregationTape& tape,
                        std::span<const double> grad_out);

/// Mean over every location of every shot, L2-normalized.
Descriptor mean_pool(std::span<const FeatureMap> shots);

/// In-place L2 normalization; throws DegenerateDescriptor below
/// kDegenerateNorm. Returns the norm before scaling.
double l2_normalize(std::span<double> values);

}  // namespace cfa

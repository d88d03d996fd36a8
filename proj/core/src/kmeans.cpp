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

#include "cfa/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cfa/errors.hpp"

namespace cfa {
namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

}  // namespace

std::vector<double> kmeans(std::span<const double> points, std::size_t dim,
                           std::size_t k, std::mt19937_64& rng,
                           std::size_t iterations) {
  if (dim == 0 || k == 0 || points.size() % dim != 0) {
    throw ConfigError("kmeans: invalid dimensions");
  }
  const std::size_t count = points.size() / dim;
  if (count < k) {
    throw DataError("kmeans: " + std::to_string(count) +
                    " points cannot seed " + std::to_string(k) + " centers");
  }
  const double* data = points.data();
  std::vector<double> centers(k * dim);

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::copy_n(data + pick(rng) * dim, dim, centers.begin());
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const double* last = centers.data() + (c - 1) * dim;
    double total = 0.0;
    for (std::size_t p = 0; p < count; ++p) {
      nearest[p] = std::min(nearest[p], squared_distance(data + p * dim, last, dim));
      total += nearest[p];
    }
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t p = 0; p < count; ++p) {
        target -= nearest[p];
        if (target <= 0.0) {
          chosen = p;
          break;
        }
      }
    }
    std::copy_n(data + chosen * dim, dim, centers.begin() + c * dim);
  }

  std::vector<std::size_t> assignment(count, 0);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> sizes(k);
  std::vector<double> distance(count);
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t p = 0; p < count; ++p) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(data + p * dim, centers.data() + c * dim, dim);
        if (d < best_dist) {
          best_dist = d;
          best = c;
        }
      }
      changed |= assignment[p] != best;
      assignment[p] = best;
      distance[p] = best_dist;
    }
    if (!changed) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t p = 0; p < count; ++p) {
      ++sizes[assignment[p]];
      for (std::size_t j = 0; j < dim; ++j) {
        sums[assignment[p] * dim + j] += data[p * dim + j];
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        const auto far = static_cast<std::size_t>(
            std::max_element(distance.begin(), distance.end()) - distance.begin());
        std::copy_n(data + far * dim, dim, centers.begin() + c * dim);
        distance[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c * dim + j] = sums[c * dim + j] / static_cast<double>(sizes[c]);
      }
    }
  }
  return centers;
}

}  // namespace cfa

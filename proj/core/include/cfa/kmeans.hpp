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
#include <random>
#include <span>
#include <vector>

namespace cfa {

/// Lloyd's k-means with k-means++ seeding over `points` (count x dim,
/// row-major). Returns k x dim centers. Empty clusters are reseeded from the
/// point farthest from its center. Requires at least k points.
std::vector<double> kmeans(std::span<const double> points, std::size_t dim,
                           std::size_t k, std::mt19937_64& rng,
                           std::size_t iterations = 25);

}  // namespace cfa

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
#include <cstdint>

namespace cfa {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 1;
  double step = 1e-4;
  double absolute_floor = 1e-7;
};

struct GradcheckReport {
  std::size_t instances = 0;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
};

/// Compares the analytic gradient of the episode objective with central
/// differences on random small episodes (C in {4,8,16}, N in {1,2,4},
/// K in {1,2,3,5}, H=W in {1,2,3}, Y in {1,2,3}, alpha in {0.5,2,10}), for
/// every prototype and every input entry. Differences at or below the
/// absolute floor count as exact.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace cfa

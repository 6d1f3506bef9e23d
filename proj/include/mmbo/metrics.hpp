// Copyright 2026 The mmbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef MMBO_METRICS_HPP
#define MMBO_METRICS_HPP

#include <optional>
#include <span>
#include <vector>

#include "mmbo/objectives.hpp"
#include "mmbo/optimizer.hpp"

namespace mmbo {

/// Distances are taken over search steps only; the initial design is excluded.
struct MetricReport {
  std::vector<double> per_step_distance;
  std::vector<std::size_t> checkpoints;
  std::vector<double> checkpoint_average;     // parallel to checkpoints
  std::vector<std::optional<std::size_t>> first_hit;  // per ground-truth maximum
  std::size_t optima_found = 0;               // maxima with a flagged step within radius
  double hit_radius = 0.1;
};

/// Mean distance to the nearest registered maximum over the first `upto` search steps.
double average_distance(const RunTrace& trace, const BenchmarkSpec& spec, std::size_t upto);

/// Earliest search step within `radius` of each registered maximum.
std::vector<std::optional<std::size_t>> first_hit_steps(const RunTrace& trace,
                                                        const BenchmarkSpec& spec, double radius);

/// Registered maxima that have at least one flagged step within `radius`.
std::vector<std::size_t> flagged_truths(const RunTrace& trace, const BenchmarkSpec& spec,
                                        double radius);

/// Checkpoints beyond the executed search steps are dropped.
MetricReport make_report(const RunTrace& trace, const BenchmarkSpec& spec,
                         std::span<const std::size_t> checkpoints, double hit_radius);

}  // namespace mmbo

#endif  // MMBO_METRICS_HPP

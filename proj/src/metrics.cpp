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

#include "mmbo/metrics.hpp"

#include <string>

#include "mmbo/errors.hpp"

namespace mmbo {

double average_distance(const RunTrace& trace, const BenchmarkSpec& spec, std::size_t upto) {
  if (spec.ground_truth.empty()) throw NoGroundTruth("average_distance: no registered maxima");
  const auto steps = trace.search_steps();
  if (upto == 0 || upto > steps.size()) {
    throw InvalidArgument("average_distance: requested " + std::to_string(upto) + " of " +
                          std::to_string(steps.size()) + " search steps");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < upto; ++i) sum += nearest_truth_distance(spec, steps[i]->point);
  return sum / static_cast<double>(upto);
}

std::vector<std::optional<std::size_t>> first_hit_steps(const RunTrace& trace,
                                                        const BenchmarkSpec& spec, double radius) {
  if (spec.ground_truth.empty()) throw NoGroundTruth("first_hit_steps: no registered maxima");
  if (!(radius > 0.0)) throw InvalidArgument("first_hit_steps: radius must be > 0");
  std::vector<std::optional<std::size_t>> hits(spec.ground_truth.size());
  for (const StepRecord* s : trace.search_steps()) {
    for (std::size_t t = 0; t < hits.size(); ++t) {
      if (!hits[t] && (spec.ground_truth[t].location - s->point).norm() <= radius) hits[t] = s->step;
    }
  }
  return hits;
}

std::vector<std::size_t> flagged_truths(const RunTrace& trace, const BenchmarkSpec& spec,
                                        double radius) {
  if (spec.ground_truth.empty()) throw NoGroundTruth("flagged_truths: no registered maxima");
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < spec.ground_truth.size(); ++t) {
    for (const StepRecord* s : trace.flagged_steps()) {
      if ((spec.ground_truth[t].location - s->point).norm() <= radius) {
        out.push_back(t);
        break;
      }
    }
  }
  return out;
}

MetricReport make_report(const RunTrace& trace, const BenchmarkSpec& spec,
                         std::span<const std::size_t> checkpoints, double hit_radius) {
  MetricReport report;
  report.hit_radius = hit_radius;
  const auto steps = trace.search_steps();
  for (const StepRecord* s : steps) report.per_step_distance.push_back(nearest_truth_distance(spec, s->point));
  double running = 0.0;
  std::vector<double> prefix{0.0};
  for (double d : report.per_step_distance) prefix.push_back(running += d);
  for (std::size_t c : checkpoints) {
    if (c == 0 || c > steps.size()) continue;
    report.checkpoints.push_back(c);
    report.checkpoint_average.push_back(prefix[c] / static_cast<double>(c));
  }
  report.first_hit = first_hit_steps(trace, spec, hit_radius);
  report.optima_found = flagged_truths(trace, spec, hit_radius).size();
  return report;
}

}  // namespace mmbo

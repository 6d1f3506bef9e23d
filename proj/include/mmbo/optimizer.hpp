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

#ifndef MMBO_OPTIMIZER_HPP
#define MMBO_OPTIMIZER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmbo/acquisition.hpp"
#include "mmbo/candidate_posteriors.hpp"
#include "mmbo/gp.hpp"
#include "mmbo/kernel.hpp"
#include "mmbo/objectives.hpp"

namespace mmbo {

/// How the finite candidate set is built.
struct CandidateSpec {
  enum class Mode { GridStep, GridPoints, Random };
  Mode mode = Mode::GridStep;
  double step = 0.1;                // GridStep: spacing, starting at each lower bound
  std::size_t points_per_dim = 0;   // GridPoints: evenly spaced, endpoints included
  std::size_t random_count = 0;     // Random: uniform draws inside the bounds
};

inline constexpr std::size_t kMaxCandidates = 10'000'000;

struct OptimizerConfig {
  Bounds bounds;
  CandidateSpec candidates;
  double min_distance = 0.0;  // d: minimum Euclidean distance between sampled points
  std::size_t budget = 40;
  std::vector<Vector> prior_points;  // explicit initial design; drawn at random when empty
  std::size_t prior_count = 3;
  std::uint64_t seed = 0;
  AcquisitionConfig acquisition;
  KernelSpec kernel = SquaredExponential{10.0, 0.1};
  double prior_mean = 0.0;
  // SE length scale is a fraction of the box width (all widths must agree).
  bool relative_length_scale = false;
  // Acquisition xi is the best value observed so far instead of
  // acquisition.threshold (standard PI/EI). Flagging still uses the fixed threshold.
  bool incumbent_threshold = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

void validate(const OptimizerConfig& cfg);

/// cfg.kernel with the length scale resolved against the bounds.
KernelSpec effective_kernel(const OptimizerConfig& cfg);

/// Full grid, or `random_count` seeded uniform points. Throws GridTooLarge
/// above kMaxCandidates.
std::vector<Vector> generate_candidates(const OptimizerConfig& cfg, std::uint64_t seed);

/// Initial design: cfg.prior_points, or prior_count seeded uniform points that
/// are pairwise at least min_distance apart.
std::vector<Vector> initial_design(const OptimizerConfig& cfg);

struct Proposal {
  std::size_t index = 0;  // into the candidate list
  Vector point;
  double acquisition = 0.0;
};

/// Feasible candidate (distance >= d to every history point) with the largest
/// acquisition; the lowest index wins ties. Empty when nothing is feasible.
std::optional<Proposal> propose_next(const GPState& state, std::span<const Vector> candidates,
                                     std::span<const Vector> history, const OptimizerConfig& cfg);

enum class StepKind { Prior, Search };

struct StepRecord {
  std::size_t step = 0;  // 0 for the initial design, then 1..budget
  StepKind kind = StepKind::Search;
  Vector point;
  double value = 0.0;
  double acquisition = 0.0;  // NaN for prior rows
  bool flagged = false;
  std::optional<double> distance;  // to the nearest ground-truth maximum
};

struct RunTrace {
  std::vector<StepRecord> steps;
  std::string termination = "budget";  // or "exhausted"
  std::size_t sample_count = 0;
  double final_jitter = 0.0;
  std::vector<std::pair<std::string, std::string>> config_echo;

  std::vector<const StepRecord*> search_steps() const;
  std::vector<const StepRecord*> flagged_steps() const;
};

/// Evaluates the initial design, then runs cfg.budget acquisition steps,
/// refitting after each observation. When `truth` is given, every record
/// carries its distance to the nearest registered maximum.
/// Throws ObjectiveFailure if the objective returns a non-finite value.
RunTrace run(const Objective& objective, const OptimizerConfig& cfg,
             const BenchmarkSpec* truth = nullptr);

}  // namespace mmbo

#endif  // MMBO_OPTIMIZER_HPP

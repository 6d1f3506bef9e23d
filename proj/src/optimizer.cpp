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

#include "mmbo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <variant>

#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

constexpr double kSupportTolerance = 1e-12;

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count / 256, 1)));
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

bool stationary(const KernelSpec& kernel) { return std::holds_alternative<SquaredExponential>(kernel); }

// Candidate bookkeeping carried across iterations: which candidates are too
// close to a sampled point, and which samples lie within kernel reach.
class CandidatePool {
 public:
  CandidatePool(std::span<const Vector> candidates, double min_distance, double reach)
      : candidates_(candidates),
        min_distance_(min_distance),
        reach_(reach),
        blocked_(candidates.size(), 0),
        near_(std::isfinite(reach) ? candidates.size() : 0) {}

  // Marks candidates closer than min_distance to x as infeasible.
  void block_around(const Vector& x, unsigned threads) {
    parallel_for(candidates_.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        if ((candidates_[c] - x).norm() < min_distance_) blocked_[c] = 1;
      }
    });
  }

  // Records sample_index for every candidate within kernel reach of x.
  void attach_sample(const Vector& x, std::uint32_t sample_index, unsigned threads) {
    if (near_.empty()) return;
    parallel_for(candidates_.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        if ((candidates_[c] - x).norm() <= reach_) near_[c].push_back(sample_index);
      }
    });
  }

  void add_sample(const Vector& x, std::uint32_t sample_index, unsigned threads) {
    parallel_for(candidates_.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        const double dist = (candidates_[c] - x).norm();
        if (dist < min_distance_) blocked_[c] = 1;
        if (!near_.empty() && dist <= reach_) near_[c].push_back(sample_index);
      }
    });
  }

  std::optional<Proposal> best(const JointPosteriorBatch& batch, const KernelSpec& kernel,
                               const AcquisitionConfig& acq, unsigned threads) const {
    const std::size_t count = candidates_.size();
    std::vector<double> scores(count, -std::numeric_limits<double>::infinity());
    const bool sparse = !near_.empty();
    // Away from every sample a stationary kernel gives the same prior posterior.
    std::optional<double> prior_score;
    if (sparse && stationary(kernel) && count > 0) {
      prior_score = acquisition_value(batch.prior(candidates_[0]), acq);
    }
    parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        if (blocked_[c]) continue;
        if (sparse) {
          if (near_[c].empty()) {
            scores[c] = prior_score ? *prior_score
                                    : acquisition_value(batch.prior(candidates_[c]), acq);
          } else {
            scores[c] = acquisition_value(batch.evaluate(candidates_[c], near_[c]), acq);
          }
        } else {
          scores[c] = acquisition_value(batch.evaluate(candidates_[c]), acq);
        }
      }
    });
    return argmax(scores);
  }

  std::optional<Proposal> best(const CandidatePosteriors& posteriors, const AcquisitionConfig& acq,
                               unsigned threads) const {
    std::vector<double> scores(candidates_.size(), -std::numeric_limits<double>::infinity());
    const std::size_t width = posteriors.width();
    parallel_for(scores.size(), threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> mean(width), cov(width * width);
      for (std::size_t c = begin; c < end; ++c) {
        if (blocked_[c]) continue;
        posteriors.posterior(c, mean, cov);
        scores[c] = acquisition_value(mean, cov, acq);
      }
    });
    return argmax(scores);
  }

 private:
  std::span<const Vector> candidates_;
  double min_distance_;
  double reach_;
  std::vector<char> blocked_;
  std::vector<std::vector<std::uint32_t>> near_;

  std::optional<Proposal> argmax(const std::vector<double>& scores) const {
    std::optional<Proposal> out;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (blocked_[c]) continue;
      if (!out || scores[c] > out->acquisition) out = Proposal{c, candidates_[c], scores[c]};
    }
    return out;
  }
};

std::size_t grid_count(const Interval& b, double step) {
  return static_cast<std::size_t>(std::floor((b.high - b.low) / step + 1e-9)) + 1;
}

}  // namespace

KernelSpec effective_kernel(const OptimizerConfig& cfg) {
  KernelSpec kernel = cfg.kernel;
  if (!cfg.relative_length_scale) return kernel;
  auto* se = std::get_if<SquaredExponential>(&kernel);
  if (se == nullptr) throw InvalidArgument("relative_length_scale needs the squared-exponential kernel");
  validate_bounds(cfg.bounds);
  const double width = cfg.bounds.front().high - cfg.bounds.front().low;
  for (const auto& b : cfg.bounds) {
    if (std::abs((b.high - b.low) - width) > 1e-12 * width) {
      throw InvalidArgument("relative_length_scale needs equal widths in every dimension");
    }
  }
  se->length_scale *= width;
  return kernel;
}

void validate(const OptimizerConfig& cfg) {
  validate_bounds(cfg.bounds);
  validate(cfg.kernel);
  validate(effective_kernel(cfg));
  validate(cfg.acquisition);
  if (!(cfg.min_distance >= 0.0) || !std::isfinite(cfg.min_distance)) {
    throw InvalidArgument("min_distance must be a finite value >= 0");
  }
  if (!std::isfinite(cfg.prior_mean)) throw InvalidArgument("prior_mean must be finite");
  switch (cfg.candidates.mode) {
    case CandidateSpec::Mode::GridStep:
      if (!(cfg.candidates.step > 0.0)) throw InvalidArgument("grid_step must be > 0");
      break;
    case CandidateSpec::Mode::GridPoints:
      if (cfg.candidates.points_per_dim < 2) throw InvalidArgument("grid_points must be >= 2");
      break;
    case CandidateSpec::Mode::Random:
      if (cfg.candidates.random_count < 1) throw InvalidArgument("candidate_count must be >= 1");
      break;
  }
  const auto dim = static_cast<Eigen::Index>(cfg.bounds.size());
  if (cfg.prior_points.empty() && cfg.prior_count < 1) {
    throw InvalidArgument("prior_count must be >= 1 when no prior_points are given");
  }
  for (std::size_t i = 0; i < cfg.prior_points.size(); ++i) {
    const auto& p = cfg.prior_points[i];
    if (p.size() != dim) throw DimensionMismatch("prior_points: point " + std::to_string(i + 1) + " has wrong dimension");
    if (!within_bounds(cfg.bounds, p)) {
      throw InvalidArgument("prior_points: point " + std::to_string(i + 1) + " is outside bounds");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((cfg.prior_points[j] - p).norm() < cfg.min_distance) {
        throw InvalidArgument("prior_points: points " + std::to_string(j + 1) + " and " +
                              std::to_string(i + 1) + " are closer than min_distance");
      }
    }
  }
}

std::vector<Vector> generate_candidates(const OptimizerConfig& cfg, std::uint64_t seed) {
  validate_bounds(cfg.bounds);
  const std::size_t dims = cfg.bounds.size();
  const auto& spec = cfg.candidates;
  if (spec.mode == CandidateSpec::Mode::Random) {
    if (spec.random_count > kMaxCandidates) throw GridTooLarge("candidate_count exceeds 1e7");
    std::mt19937_64 rng(seed);
    std::vector<Vector> out(spec.random_count, Vector(static_cast<Eigen::Index>(dims)));
    for (auto& x : out) {
      for (std::size_t d = 0; d < dims; ++d) {
        std::uniform_real_distribution<double> u(cfg.bounds[d].low, cfg.bounds[d].high);
        x(static_cast<Eigen::Index>(d)) = u(rng);
      }
    }
    return out;
  }

  std::vector<std::vector<double>> axes(dims);
  double total = 1.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const auto& b = cfg.bounds[d];
    if (spec.mode == CandidateSpec::Mode::GridStep) {
      if (!(spec.step > 0.0)) throw InvalidArgument("grid_step must be > 0");
      const std::size_t n = grid_count(b, spec.step);
      if (static_cast<double>(n) > static_cast<double>(kMaxCandidates)) {
        throw GridTooLarge("candidate grid exceeds 1e7 points");
      }
      for (std::size_t i = 0; i < n; ++i) {
        axes[d].push_back(std::min(b.high, b.low + static_cast<double>(i) * spec.step));
      }
    } else {
      const std::size_t n = spec.points_per_dim;
      if (n < 2) throw InvalidArgument("grid_points must be >= 2");
      for (std::size_t i = 0; i < n; ++i) {
        axes[d].push_back(b.low + (b.high - b.low) * static_cast<double>(i) /
                                      static_cast<double>(n - 1));
      }
    }
    total *= static_cast<double>(axes[d].size());
  }
  if (total > static_cast<double>(kMaxCandidates)) throw GridTooLarge("candidate grid exceeds 1e7 points");

  const auto count = static_cast<std::size_t>(total);
  std::vector<Vector> out;
  out.reserve(count);
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t c = 0; c < count; ++c) {
    Vector x(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) x(static_cast<Eigen::Index>(d)) = axes[d][idx[d]];
    out.push_back(std::move(x));
    // Last dimension varies fastest.
    for (std::size_t d = dims; d-- > 0;) {
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }
  return out;
}

std::vector<Vector> initial_design(const OptimizerConfig& cfg) {
  if (!cfg.prior_points.empty()) return cfg.prior_points;
  const std::size_t dims = cfg.bounds.size();
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vector> out;
  std::size_t attempts = 0;
  while (out.size() < cfg.prior_count) {
    if (++attempts > 100000) {
      throw InvalidArgument("initial design: cannot place prior_count points at min_distance");
    }
    Vector x(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
      std::uniform_real_distribution<double> u(cfg.bounds[d].low, cfg.bounds[d].high);
      x(static_cast<Eigen::Index>(d)) = u(rng);
    }
    const bool far = std::all_of(out.begin(), out.end(), [&](const Vector& p) {
      return (p - x).norm() >= cfg.min_distance;
    });
    if (far) out.push_back(std::move(x));
  }
  return out;
}

std::optional<Proposal> propose_next(const GPState& state, std::span<const Vector> candidates,
                                     std::span<const Vector> history, const OptimizerConfig& cfg) {
  validate(cfg.acquisition);
  const unsigned threads = resolve_threads(cfg.threads);
  JointPosteriorBatch batch(state, kSupportTolerance);
  CandidatePool pool(candidates, cfg.min_distance, batch.support_radius());
  for (const auto& h : history) pool.block_around(h, threads);
  for (std::size_t i = 0; i < state.size(); ++i) {
    pool.attach_sample(state.inputs()[i], static_cast<std::uint32_t>(i), threads);
  }
  AcquisitionConfig acq = cfg.acquisition;
  if (cfg.incumbent_threshold) {
    acq.threshold = *std::max_element(state.values().begin(), state.values().end());
  }
  return pool.best(batch, state.kernel(), acq, threads);
}

std::vector<const StepRecord*> RunTrace::search_steps() const {
  std::vector<const StepRecord*> out;
  for (const auto& s : steps) {
    if (s.kind == StepKind::Search) out.push_back(&s);
  }
  return out;
}

std::vector<const StepRecord*> RunTrace::flagged_steps() const {
  std::vector<const StepRecord*> out;
  for (const auto& s : steps) {
    if (s.flagged) out.push_back(&s);
  }
  return out;
}

RunTrace run(const Objective& objective, const OptimizerConfig& cfg, const BenchmarkSpec* truth) {
  validate(cfg);
  const unsigned threads = resolve_threads(cfg.threads);
  const std::vector<Vector> candidates = generate_candidates(cfg, cfg.seed);
  const std::vector<Vector> design = initial_design(cfg);
  const bool with_truth = truth != nullptr && !truth->ground_truth.empty();

  auto observe = [&](const Vector& x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
      std::string where;
      for (Eigen::Index i = 0; i < x.size(); ++i) where += (i ? "," : "") + std::to_string(x(i));
      throw ObjectiveFailure("objective returned a non-finite value at (" + where + ")");
    }
    return v;
  };

  RunTrace trace;
  std::vector<Vector> inputs;
  std::vector<double> values;
  for (const auto& x : design) {
    StepRecord rec;
    rec.step = 0;
    rec.kind = StepKind::Prior;
    rec.point = x;
    rec.value = observe(x);
    rec.acquisition = std::numeric_limits<double>::quiet_NaN();
    if (with_truth) rec.distance = nearest_truth_distance(*truth, x);
    inputs.push_back(x);
    values.push_back(rec.value);
    trace.steps.push_back(std::move(rec));
  }
  const KernelSpec kernel = effective_kernel(cfg);
  GPState state = GPState::fit(inputs, values, cfg.prior_mean, kernel);

  // Only blocking is tracked here; the posteriors cover every candidate.
  CandidatePool pool(candidates, cfg.min_distance, std::numeric_limits<double>::infinity());
  CandidatePosteriors posteriors(candidates, kernel, cfg.prior_mean);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    pool.add_sample(inputs[i], static_cast<std::uint32_t>(i), threads);
    posteriors.add(inputs[i], values[i]);
  }

  for (std::size_t step = 1; step <= cfg.budget; ++step) {
    AcquisitionConfig acq = cfg.acquisition;
    if (cfg.incumbent_threshold) acq.threshold = *std::max_element(values.begin(), values.end());
    const auto proposal = pool.best(posteriors, acq, threads);
    if (!proposal) {
      trace.termination = "exhausted";
      break;
    }
    StepRecord rec;
    rec.step = step;
    rec.kind = StepKind::Search;
    rec.point = proposal->point;
    rec.acquisition = proposal->acquisition;
    rec.value = observe(rec.point);
    if (with_truth) rec.distance = nearest_truth_distance(*truth, rec.point);

    inputs.push_back(rec.point);
    values.push_back(rec.value);
    state = GPState::fit(inputs, values, cfg.prior_mean, kernel);
    posteriors.add(rec.point, rec.value);
    pool.add_sample(rec.point, static_cast<std::uint32_t>(inputs.size() - 1), threads);
    rec.flagged = is_flagged_optimum(state, rec.point, rec.value, cfg.acquisition);
    trace.steps.push_back(std::move(rec));
  }
  trace.sample_count = state.size();
  trace.final_jitter = std::max(state.factor().jitter(), posteriors.jitter());
  return trace;
}

}  // namespace mmbo

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

#ifndef MMBO_CANDIDATE_POSTERIORS_HPP
#define MMBO_CANDIDATE_POSTERIORS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmbo/gp.hpp"
#include "mmbo/kernel.hpp"
#include "mmbo/numerics.hpp"

namespace mmbo {

/// Joint (value, gradient) posteriors over a fixed set of query points, kept
/// current one observation at a time. Adding the k-th sample costs
/// O(points * k * n) instead of refactorizing per point. Memory is
/// O(points * n^2).
///
/// The Cholesky factor grows by one row per sample. When the new pivot falls
/// below kPivotFloor times the prior variance, the next jitter from the
/// schedule is adopted and everything is rebuilt; the jitter never decreases.
class CandidatePosteriors {
 public:
  static constexpr double kPivotFloor = 1e-12;
  /// Kernel values below this fraction of k(x, x) are dropped.
  static constexpr double kReachTolerance = 1e-12;

  CandidatePosteriors(std::vector<Vector> points, KernelSpec kernel, double prior_mean,
                      std::span<const double> jitter_schedule = default_jitter_schedule());

  /// Throws NotPositiveDefinite once the schedule is exhausted.
  void add(const Vector& x, double value);

  JointGaussian posterior(std::size_t index) const;

  /// Writes the posterior into caller buffers: width() means and a row-major
  /// width() x width() covariance, symmetrized with the diagonal clamped at 0.
  void posterior(std::size_t index, std::span<double> mean, std::span<double> cov) const;

  /// 1 + input dimension.
  std::size_t width() const { return static_cast<std::size_t>(width_); }

  const std::vector<Vector>& points() const { return points_; }
  std::size_t sample_count() const { return inputs_.size(); }
  double jitter() const { return schedule_[jitter_index_]; }

 private:
  // Returns false when the pivot is too small for the current jitter.
  bool append(const Vector& x, double value);
  void rebuild();
  // Writes (k(p, s), d k(s, p) / dp) into out; false when s is out of reach.
  bool cross(const Vector& p, const Vector& s, double* out) const;
  // Stores the per-axis kernel factors of sample slot k.
  void store_axis_factors(const Vector& x, std::size_t k);
  // Adds v v^T for v = -(sum_i coef_i a(x_i)) / pivot, using the axis tables.
  template <int Dim>
  void update_from_tables(const std::vector<double>& coef, double pivot, double beta_new);

  // For SE on points with few distinct coordinates per axis, k(p, s) is a
  // product of per-axis factors that can be tabulated once per sample.
  struct AxisTables {
    std::vector<std::vector<double>> coords;   // sorted distinct values per axis
    std::vector<std::uint32_t> index;          // per point, dim_ coordinate indices
    std::vector<std::vector<double>> factor;   // per axis, coords x capacity, sample fastest
    std::vector<std::vector<double>> sample;   // per axis, sample coordinates
    std::size_t capacity = 0;
  };
  std::optional<AxisTables> axes_;

  std::vector<Vector> points_;
  KernelSpec kernel_;
  double prior_mean_;
  std::vector<double> schedule_;
  std::size_t jitter_index_ = 0;
  Eigen::Index dim_;
  Eigen::Index width_;  // 1 + dim
  Matrix prior_cov_;     // K0, identical for every point of a stationary kernel
  bool stationary_;
  double reach2_;

  std::vector<Vector> inputs_;
  std::vector<double> values_;
  Matrix lower_;  // leading k x k block is in use
  Vector beta_;   // L^{-1} (f - mu0)

  std::vector<double> mean_;  // per point, width_ entries of A K^{-1} (f - mu0)
  std::vector<double> reduction_;  // per point, width_^2 entries of A K^{-1} A^T
};

}  // namespace mmbo

#endif  // MMBO_CANDIDATE_POSTERIORS_HPP

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

#ifndef MMBO_NUMERICS_HPP
#define MMBO_NUMERICS_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

namespace mmbo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default escalation used whenever a covariance matrix has to be factorized.
inline const std::vector<double>& default_jitter_schedule() {
  static const std::vector<double> schedule{0.0, 1e-10, 1e-8, 1e-6};
  return schedule;
}

/// Maximum absolute asymmetry accepted by symmetric-input operations.
inline constexpr double kSymmetryTolerance = 1e-8;

/// Lower-triangular factor of (m + jitter * I) for a symmetric positive-definite m.
class CholeskyFactor {
 public:
  CholeskyFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  const Matrix& lower() const { return lower_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return lower_.rows(); }

  /// (m + jitter * I)^{-1} as a dense matrix.
  Matrix inverse() const;

 private:
  Matrix lower_;
  double jitter_;
};

/// Factorizes m with the smallest jitter from `jitter_schedule` that succeeds.
/// Throws NotSymmetric when max |m - m^T| exceeds `symmetry_tolerance` and
/// NotPositiveDefinite when every jitter fails.
CholeskyFactor cholesky(const Matrix& m,
                        std::span<const double> jitter_schedule = default_jitter_schedule(),
                        double symmetry_tolerance = kSymmetryTolerance);

/// Solves (m + jitter * I) x = b for every column of b.
Matrix solve(const CholeskyFactor& factor, const Matrix& b);
Vector solve(const CholeskyFactor& factor, const Vector& b);

/// Upper tail of the standard normal, P(Z > z), via erfc.
double q_function(double z);

/// Standard normal density.
double normal_pdf(double z);

double max_asymmetry(const Matrix& m);

}  // namespace mmbo

#endif  // MMBO_NUMERICS_HPP

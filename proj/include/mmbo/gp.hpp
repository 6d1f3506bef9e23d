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

#ifndef MMBO_GP_HPP
#define MMBO_GP_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mmbo/kernel.hpp"
#include "mmbo/numerics.hpp"

namespace mmbo {

/// Noise-free GP posterior over observed samples, with a constant prior mean.
///
/// Immutable after fit(); adding a sample means fitting a new state.
class GPState {
 public:
  /// Throws EmptyData, DimensionMismatch, NonFiniteInput, InvalidArgument
  /// (bad kernel) or NotPositiveDefinite (jitter schedule exhausted).
  static GPState fit(std::vector<Vector> inputs, std::vector<double> values, double prior_mean,
                     KernelSpec kernel,
                     std::span<const double> jitter_schedule = default_jitter_schedule());

  const std::vector<Vector>& inputs() const { return inputs_; }
  const std::vector<double>& values() const { return values_; }
  double prior_mean() const { return prior_mean_; }
  const KernelSpec& kernel() const { return kernel_; }
  const CholeskyFactor& factor() const { return factor_; }
  /// K^{-1} (f(x_1:k) - mu0)
  const Vector& alpha_vec() const { return alpha_vec_; }
  Eigen::Index dimension() const { return inputs_.front().size(); }
  std::size_t size() const { return inputs_.size(); }

 private:
  GPState(std::vector<Vector> inputs, std::vector<double> values, double prior_mean,
          KernelSpec kernel, CholeskyFactor factor, Vector alpha_vec)
      : inputs_(std::move(inputs)),
        values_(std::move(values)),
        prior_mean_(prior_mean),
        kernel_(std::move(kernel)),
        factor_(std::move(factor)),
        alpha_vec_(std::move(alpha_vec)) {}

  std::vector<Vector> inputs_;
  std::vector<double> values_;
  double prior_mean_;
  KernelSpec kernel_;
  CholeskyFactor factor_;
  Vector alpha_vec_;
};

/// Gaussian over (f(x), grad f(y)); index 0 is the value, 1..n the gradient.
struct JointGaussian {
  Vector mean;
  Matrix cov;

  Eigen::Index gradient_dim() const { return mean.size() - 1; }
  double value_mean() const { return mean(0); }
  double value_variance() const { return cov(0, 0); }
  Vector gradient_mean() const { return mean.tail(gradient_dim()); }
  Vector value_gradient_cov() const { return cov.row(0).tail(gradient_dim()).transpose(); }
  Matrix gradient_cov() const { return cov.bottomRightCorner(gradient_dim(), gradient_dim()); }
};

/// Builds a JointGaussian after symmetrizing cov and clamping negative
/// diagonal round-off to zero.
JointGaussian make_joint_gaussian(Vector mean, Matrix cov);

struct ConditionalGaussian {
  double mean = 0.0;
  double variance = 0.0;
};

struct ValuePosterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Joint posterior of value and gradient at the same point x.
JointGaussian joint_posterior(const GPState& state, const Vector& x);

/// Joint posterior of f(x) and grad f(y) for possibly distinct x and y.
JointGaussian joint_posterior(const GPState& state, const Vector& x, const Vector& y);

/// Distribution of f(x) given grad f(x) = g.
ConditionalGaussian condition_value_on_gradient(
    const JointGaussian& joint, const Vector& g,
    std::span<const double> jitter_schedule = default_jitter_schedule());

/// Same conditional through a pseudo-inverse of the gradient covariance;
/// eigen-directions below rel_tol * largest eigenvalue are dropped. Used when
/// round-off leaves the gradient covariance indefinite.
ConditionalGaussian condition_value_on_gradient_pinv(const JointGaussian& joint, const Vector& g,
                                                     double rel_tol = 1e-9);

/// prod_i P(|grad_i f| < epsilon) using the per-dimension marginals.
double gradient_band_probability(const JointGaussian& joint, double epsilon);

ValuePosterior value_posterior(const GPState& state, const Vector& x);

/// Gradient of the posterior mean surface at x.
Vector posterior_mean_gradient(const GPState& state, const Vector& x);

/// Evaluates joint posteriors for many query points against one state.
///
/// Holds an explicit K^{-1} so that a query can restrict itself to the samples
/// inside the kernel's support radius. Kernels without finite support use all
/// samples. Read-only after construction; safe to share across threads.
class JointPosteriorBatch {
 public:
  /// rel_tol: kernel values below rel_tol * k(x, x) are treated as zero.
  explicit JointPosteriorBatch(const GPState& state, double rel_tol = 1e-12);

  double support_radius() const { return radius_; }
  bool finite_support() const { return std::isfinite(radius_); }

  /// Posterior at x using only the listed sample indices. The caller guarantees
  /// that every sample outside `near` lies beyond support_radius().
  JointGaussian evaluate(const Vector& x, std::span<const std::uint32_t> near) const;

  /// Posterior at x using every sample.
  JointGaussian evaluate(const Vector& x) const;

  /// Prior joint distribution (no sample within reach).
  JointGaussian prior(const Vector& x) const;

 private:
  GPState state_;
  Matrix inverse_;
  double radius_;
};

}  // namespace mmbo

#endif  // MMBO_GP_HPP

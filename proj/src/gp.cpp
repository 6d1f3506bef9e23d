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

#include "mmbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gaussian_detail.hpp"
#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

void require_dim(const GPState& state, const Vector& x, const char* op) {
  if (x.size() != state.dimension()) {
    throw DimensionMismatch(std::string(op) + ": query has dimension " + std::to_string(x.size()) +
                            ", state has " + std::to_string(state.dimension()));
  }
}

// Rows of A for one training input: value covariance and gradient covariance.
void fill_cross_column(const KernelSpec& kernel, const Vector& x, const Vector& y,
                       const Vector& sample, Eigen::Ref<Vector> column) {
  column(0) = eval(kernel, x, sample);
  column.tail(column.size() - 1) = grad_second_arg(kernel, sample, y);
}

Matrix prior_block(const KernelSpec& kernel, const Vector& x, const Vector& y) {
  const auto n = y.size();
  Matrix k0(n + 1, n + 1);
  k0(0, 0) = eval(kernel, x, x);
  // Cov(f(x), grad f(y)) = d k(x, y) / dy
  const Vector cross = grad_second_arg(kernel, x, y);
  k0.row(0).tail(n) = cross.transpose();
  k0.col(0).tail(n) = cross;
  k0.bottomRightCorner(n, n) = hess_mixed(kernel, y, y);
  return k0;
}

}  // namespace

GPState GPState::fit(std::vector<Vector> inputs, std::vector<double> values, double prior_mean,
                     KernelSpec kernel, std::span<const double> jitter_schedule) {
  if (inputs.empty()) throw EmptyData("fit: at least one sample is required");
  if (inputs.size() != values.size()) {
    throw DimensionMismatch("fit: " + std::to_string(inputs.size()) + " inputs but " +
                            std::to_string(values.size()) + " values");
  }
  validate(kernel);
  if (!std::isfinite(prior_mean)) throw NonFiniteInput("fit: prior mean is not finite");
  const auto dim = inputs.front().size();
  if (dim == 0) throw DimensionMismatch("fit: zero-dimensional input");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) {
      throw DimensionMismatch("fit: input " + std::to_string(i) + " has dimension " +
                              std::to_string(inputs[i].size()));
    }
    if (!inputs[i].allFinite() || !std::isfinite(values[i])) {
      throw NonFiniteInput("fit: sample " + std::to_string(i) + " is not finite");
    }
  }

  const auto k = static_cast<Eigen::Index>(inputs.size());
  Matrix gram(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    gram(i, i) = eval(kernel, inputs[i], inputs[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      gram(i, j) = gram(j, i) = eval(kernel, inputs[i], inputs[j]);
    }
  }
  CholeskyFactor factor = cholesky(gram, jitter_schedule);

  Vector centered(k);
  for (Eigen::Index i = 0; i < k; ++i) centered(i) = values[i] - prior_mean;
  Vector alpha_vec = solve(factor, centered);

  return GPState(std::move(inputs), std::move(values), prior_mean, std::move(kernel),
                 std::move(factor), std::move(alpha_vec));
}

JointGaussian make_joint_gaussian(Vector mean, Matrix cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DimensionMismatch("joint gaussian: covariance does not match mean");
  }
  Matrix sym = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < sym.rows(); ++i) sym(i, i) = std::max(sym(i, i), 0.0);
  return JointGaussian{std::move(mean), std::move(sym)};
}

JointGaussian joint_posterior(const GPState& state, const Vector& x) {
  return joint_posterior(state, x, x);
}

JointGaussian joint_posterior(const GPState& state, const Vector& x, const Vector& y) {
  require_dim(state, x, "joint_posterior");
  require_dim(state, y, "joint_posterior");
  const auto n = x.size();
  const auto k = static_cast<Eigen::Index>(state.size());
  const KernelSpec& kernel = state.kernel();

  Matrix a(n + 1, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    fill_cross_column(kernel, x, y, state.inputs()[i], a.col(i));
  }

  Vector mean = a * state.alpha_vec();
  mean(0) += state.prior_mean();

  // A K^{-1} A^T = V^T V with V = L^{-1} A^T.
  const Matrix v = state.factor().lower().triangularView<Eigen::Lower>().solve(a.transpose());
  Matrix cov = prior_block(kernel, x, y) - v.transpose() * v;
  return make_joint_gaussian(std::move(mean), std::move(cov));
}

namespace {

void require_gradient_dim(const JointGaussian& joint, const Vector& g, const char* op) {
  if (g.size() != joint.gradient_dim()) {
    throw DimensionMismatch(std::string(op) + ": gradient value has dimension " +
                            std::to_string(g.size()) + ", expected " +
                            std::to_string(joint.gradient_dim()));
  }
}

}  // namespace

ConditionalGaussian condition_value_on_gradient(const JointGaussian& joint, const Vector& g,
                                                std::span<const double> jitter_schedule) {
  require_gradient_dim(joint, g, "condition_value_on_gradient");
  if (!joint.cov.allFinite() || !joint.mean.allFinite()) {
    throw NonFiniteInput("condition_value_on_gradient: non-finite joint distribution");
  }
  for (double jitter : jitter_schedule) {
    if (jitter < 0.0) throw InvalidArgument("condition_value_on_gradient: negative jitter");
  }
  const Matrix sym = 0.5 * (joint.cov + joint.cov.transpose());
  const auto out = detail::condition_cholesky(joint.mean, sym, g, jitter_schedule);
  if (!out) {
    throw SingularGradientCovariance(
        "condition_value_on_gradient: gradient covariance is singular after jitter");
  }
  return *out;
}

ConditionalGaussian condition_value_on_gradient_pinv(const JointGaussian& joint, const Vector& g,
                                                     double rel_tol) {
  require_gradient_dim(joint, g, "condition_value_on_gradient_pinv");
  const Matrix sym = 0.5 * (joint.cov + joint.cov.transpose());
  return detail::condition_pinv(joint.mean, sym, g, rel_tol);
}

double gradient_band_probability(const JointGaussian& joint, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("gradient_band_probability: epsilon must be > 0");
  return detail::band_probability(joint.mean, joint.cov, epsilon);
}

ValuePosterior value_posterior(const GPState& state, const Vector& x) {
  require_dim(state, x, "value_posterior");
  const auto k = static_cast<Eigen::Index>(state.size());
  Vector kx(k);
  for (Eigen::Index i = 0; i < k; ++i) kx(i) = eval(state.kernel(), x, state.inputs()[i]);
  const Vector v = state.factor().lower().triangularView<Eigen::Lower>().solve(kx);
  ValuePosterior out;
  out.mean = state.prior_mean() + kx.dot(state.alpha_vec());
  out.variance = std::max(eval(state.kernel(), x, x) - v.squaredNorm(), 0.0);
  return out;
}

Vector posterior_mean_gradient(const GPState& state, const Vector& x) {
  require_dim(state, x, "posterior_mean_gradient");
  Vector grad = Vector::Zero(x.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    grad += state.alpha_vec()(static_cast<Eigen::Index>(i)) *
            grad_second_arg(state.kernel(), state.inputs()[i], x);
  }
  return grad;
}

JointPosteriorBatch::JointPosteriorBatch(const GPState& state, double rel_tol)
    : state_(state),
      inverse_(state.factor().inverse()),
      radius_(mmbo::support_radius(state.kernel(), rel_tol)) {
  inverse_ = 0.5 * (inverse_ + inverse_.transpose());
}

JointGaussian JointPosteriorBatch::prior(const Vector& x) const {
  if (x.size() != state_.dimension()) throw DimensionMismatch("batch prior: bad dimension");
  Vector mean = Vector::Zero(x.size() + 1);
  mean(0) = state_.prior_mean();
  return make_joint_gaussian(std::move(mean), prior_block(state_.kernel(), x, x));
}

JointGaussian JointPosteriorBatch::evaluate(const Vector& x,
                                            std::span<const std::uint32_t> near) const {
  if (x.size() != state_.dimension()) throw DimensionMismatch("batch evaluate: bad dimension");
  if (near.empty()) return prior(x);
  const auto n = x.size();
  const auto m = static_cast<Eigen::Index>(near.size());
  Matrix a(n + 1, m);
  Vector alpha_near(m);
  Matrix inv_near(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto i = static_cast<Eigen::Index>(near[static_cast<std::size_t>(c)]);
    fill_cross_column(state_.kernel(), x, x, state_.inputs()[static_cast<std::size_t>(i)],
                      a.col(c));
    alpha_near(c) = state_.alpha_vec()(i);
    for (Eigen::Index r = 0; r <= c; ++r) {
      const auto j = static_cast<Eigen::Index>(near[static_cast<std::size_t>(r)]);
      inv_near(r, c) = inv_near(c, r) = inverse_(j, i);
    }
  }
  Vector mean = a * alpha_near;
  mean(0) += state_.prior_mean();
  Matrix cov = prior_block(state_.kernel(), x, x) - a * inv_near * a.transpose();
  return make_joint_gaussian(std::move(mean), std::move(cov));
}

JointGaussian JointPosteriorBatch::evaluate(const Vector& x) const {
  std::vector<std::uint32_t> all(state_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  return evaluate(x, all);
}

}  // namespace mmbo

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

#ifndef MMBO_KERNEL_HPP
#define MMBO_KERNEL_HPP

#include <variant>

#include "mmbo/numerics.hpp"

namespace mmbo {

/// k(x, x') = alpha * exp(-|x - x'|^2 / (2 l^2))
struct SquaredExponential {
  double alpha = 1.0;
  double length_scale = 1.0;
};

/// k(x, x') = alpha_bar * (x . x' - offset)^degree
///
/// The minus sign in front of the offset is intentional. Analytic derivatives
/// exist only for the homogeneous quadratic case (offset 0, degree 2).
struct Polynomial {
  double alpha_bar = 1.0;
  double offset = 0.0;
  int degree = 2;
};

using KernelSpec = std::variant<SquaredExponential, Polynomial>;

/// Blocks of the prior covariance of (f(x), grad f(x)) at a single point.
struct JointKernelBlocks {
  double kxx = 0.0;  // k(x, x)
  Vector cross;      // d k(x, y) / dy at y = x
  Matrix hess;       // d^2 k(y, y') / dy dy' at y = y' = x
};

/// Throws InvalidArgument if any hyperparameter is out of range.
void validate(const KernelSpec& spec);

double eval(const KernelSpec& spec, const Vector& x, const Vector& x2);

/// Gradient of k(y, x) with respect to y.
///
/// Derivatives are always taken with respect to the argument named y, which is
/// the point the joint posterior is queried at; x is a training input.
Vector grad_second_arg(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Mixed second derivative d^2 k(y, y2) / dy dy2, entry (i, j) = d/dy_i d/dy2_j.
Matrix hess_mixed(const KernelSpec& spec, const Vector& y, const Vector& y2);

JointKernelBlocks joint_blocks(const KernelSpec& spec, const Vector& x);

/// Distance beyond which k and its derivatives are below rel_tol * k(x, x).
/// Infinite for kernels without decay.
double support_radius(const KernelSpec& spec, double rel_tol);

}  // namespace mmbo

#endif  // MMBO_KERNEL_HPP

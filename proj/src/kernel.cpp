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

#include "mmbo/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(op) + ": dimensions " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()) + " differ");
  }
}

void require_quadratic(const Polynomial& p, const char* op) {
  if (p.offset != 0.0 || p.degree != 2) {
    throw Unsupported(std::string(op) +
                      ": polynomial derivatives are only available for offset 0, degree 2");
  }
}

double se_value(const SquaredExponential& se, const Vector& a, const Vector& b) {
  const double l2 = se.length_scale * se.length_scale;
  return se.alpha * std::exp(-(a - b).squaredNorm() / (2.0 * l2));
}

}  // namespace

void validate(const KernelSpec& spec) {
  std::visit(Overloaded{
                 [](const SquaredExponential& se) {
                   if (!(se.alpha > 0.0) || !std::isfinite(se.alpha)) {
                     throw InvalidArgument("squared exponential: alpha must be > 0");
                   }
                   if (!(se.length_scale > 0.0) || !std::isfinite(se.length_scale)) {
                     throw InvalidArgument("squared exponential: length_scale must be > 0");
                   }
                 },
                 [](const Polynomial& p) {
                   if (!(p.alpha_bar > 0.0) || !std::isfinite(p.alpha_bar)) {
                     throw InvalidArgument("polynomial: alpha_bar must be > 0");
                   }
                   if (!(p.offset >= 0.0) || !std::isfinite(p.offset)) {
                     throw InvalidArgument("polynomial: offset must be >= 0");
                   }
                   if (p.degree < 1) throw InvalidArgument("polynomial: degree must be >= 1");
                 },
             },
             spec);
}

double eval(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  require_same_dim(x, x2, "kernel eval");
  return std::visit(Overloaded{
                        [&](const SquaredExponential& se) { return se_value(se, x, x2); },
                        [&](const Polynomial& p) {
                          return p.alpha_bar * std::pow(x.dot(x2) - p.offset, p.degree);
                        },
                    },
                    spec);
}

Vector grad_second_arg(const KernelSpec& spec, const Vector& x, const Vector& y) {
  require_same_dim(x, y, "grad_second_arg");
  return std::visit(Overloaded{
                        [&](const SquaredExponential& se) -> Vector {
                          const double l2 = se.length_scale * se.length_scale;
                          return -((y - x) / l2) * se_value(se, y, x);
                        },
                        [&](const Polynomial& p) -> Vector {
                          require_quadratic(p, "grad_second_arg");
                          return 2.0 * p.alpha_bar * y.dot(x) * x;
                        },
                    },
                    spec);
}

Matrix hess_mixed(const KernelSpec& spec, const Vector& y, const Vector& y2) {
  require_same_dim(y, y2, "hess_mixed");
  const auto n = y.size();
  return std::visit(Overloaded{
                        [&](const SquaredExponential& se) -> Matrix {
                          const double l2 = se.length_scale * se.length_scale;
                          const Vector r = y - y2;
                          Matrix h = Matrix::Identity(n, n) - (r * r.transpose()) / l2;
                          return (se_value(se, y, y2) / l2) * h;
                        },
                        [&](const Polynomial& p) -> Matrix {
                          require_quadratic(p, "hess_mixed");
                          Matrix h = y2 * y.transpose();
                          h.diagonal().array() += y.dot(y2);
                          return 2.0 * p.alpha_bar * h;
                        },
                    },
                    spec);
}

JointKernelBlocks joint_blocks(const KernelSpec& spec, const Vector& x) {
  validate(spec);
  JointKernelBlocks blocks;
  blocks.kxx = eval(spec, x, x);
  // d k(x, y)/dy at y = x; the kernels here are symmetric in their arguments.
  blocks.cross = grad_second_arg(spec, x, x);
  blocks.hess = hess_mixed(spec, x, x);
  return blocks;
}

double support_radius(const KernelSpec& spec, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("support_radius: rel_tol in (0,1)");
  return std::visit(Overloaded{
                        [&](const SquaredExponential& se) {
                          // The derivative blocks carry an extra polynomial factor
                          // in r / l; pad the radius by one length scale for it.
                          return se.length_scale * (std::sqrt(-2.0 * std::log(rel_tol)) + 1.0);
                        },
                        [](const Polynomial&) { return std::numeric_limits<double>::infinity(); },
                    },
                    spec);
}

}  // namespace mmbo

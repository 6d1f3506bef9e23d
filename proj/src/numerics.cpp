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

#include "mmbo/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw NonFiniteInput(std::string(what) + ": non-finite argument");
}

}  // namespace

double max_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("max_asymmetry: matrix is not square");
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

CholeskyFactor cholesky(const Matrix& m, std::span<const double> jitter_schedule,
                        double symmetry_tolerance) {
  if (m.rows() != m.cols()) throw DimensionMismatch("cholesky: matrix is not square");
  if (!m.allFinite()) throw NonFiniteInput("cholesky: matrix has non-finite entries");
  const double asym = max_asymmetry(m);
  if (asym > symmetry_tolerance) {
    throw NotSymmetric("cholesky: asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  const auto n = m.rows();
  for (double jitter : jitter_schedule) {
    if (jitter < 0.0) throw InvalidArgument("cholesky: negative jitter in schedule");
    Matrix shifted = m;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    // LLT only checks pivots > 0; reject factors too small to be usable.
    if (n > 0 && !(lower.diagonal().minCoeff() > 0.0)) continue;
    if (!lower.allFinite()) continue;
    return CholeskyFactor(std::move(lower), jitter);
  }
  throw NotPositiveDefinite("cholesky: factorization failed for every jitter in the schedule");
}

Matrix CholeskyFactor::inverse() const {
  return solve(*this, Matrix(Matrix::Identity(size(), size())));
}

Matrix solve(const CholeskyFactor& factor, const Matrix& b) {
  if (b.rows() != factor.size()) {
    throw DimensionMismatch("solve: right-hand side has " + std::to_string(b.rows()) +
                            " rows, factor has " + std::to_string(factor.size()));
  }
  const auto lower = factor.lower().triangularView<Eigen::Lower>();
  Matrix y = lower.solve(b);
  return factor.lower().transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector solve(const CholeskyFactor& factor, const Vector& b) {
  Matrix x = solve(factor, Matrix(b));
  return x.col(0);
}

double q_function(double z) {
  require_finite(z, "q_function");
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
  require_finite(z, "normal_pdf");
  return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

}  // namespace mmbo

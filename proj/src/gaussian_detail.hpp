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

#ifndef MMBO_GAUSSIAN_DETAIL_HPP
#define MMBO_GAUSSIAN_DETAIL_HPP

// Conditioning and band helpers shared by the heap-allocated and the
// fixed-capacity code paths. Private to the library.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mmbo/gp.hpp"
#include "mmbo/numerics.hpp"

namespace mmbo::detail {

inline constexpr int kSmallGradientDim = 8;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kSmallGradientDim + 1, 1>;
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kSmallGradientDim + 1,
                  kSmallGradientDim + 1>;

/// P(-eps < N(mu, var) < eps).
inline double band_interval_probability(double mu, double var, double epsilon) {
  if (!(var > 0.0)) return std::abs(mu) < epsilon ? 1.0 : 0.0;
  if (std::isinf(epsilon)) return 1.0;
  const double s = std::sqrt(var);
  const double lo = (-epsilon - mu) / s;
  const double hi = (epsilon - mu) / s;
  // P(lo < Z < hi), evaluated on whichever side keeps both tails small.
  double p;
  if (lo >= 0.0) {
    p = q_function(lo) - q_function(hi);
  } else if (hi <= 0.0) {
    p = q_function(-hi) - q_function(-lo);
  } else {
    p = 1.0 - q_function(-lo) - q_function(hi);
  }
  return std::clamp(p, 0.0, 1.0);
}

template <class V, class M>
double band_probability(const V& mean, const M& cov, double epsilon) {
  double prob = 1.0;
  for (Eigen::Index i = 1; i < mean.size(); ++i) {
    prob *= band_interval_probability(mean(i), cov(i, i), epsilon);
  }
  return prob;
}

/// f given grad f = g through a Cholesky of the gradient block, trying each
/// jitter in turn. nullopt when every jitter fails. `mean` and `cov` cover
/// (f, grad f); cov must be symmetric.
template <class V, class M, class G>
std::optional<ConditionalGaussian> condition_cholesky(const V& mean, const M& cov, const G& g,
                                                      std::span<const double> jitter_schedule) {
  const Eigen::Index n = mean.size() - 1;
  if (n == 0 || cov.row(0).tail(n).isZero(0.0)) {
    return ConditionalGaussian{mean(0), std::max(cov(0, 0), 0.0)};
  }
  const V sxy = cov.col(0).tail(n);
  for (double jitter : jitter_schedule) {
    M shifted = cov.bottomRightCorner(n, n);
    shifted.diagonal().array() += jitter;
    Eigen::LLT<M> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    const M lower = llt.matrixL();
    if (!(lower.diagonal().minCoeff() > 0.0) || !lower.allFinite()) continue;
    const V gain = llt.solve(sxy);  // Syy^{-1} Syx
    const V resid = g - mean.tail(n);
    return ConditionalGaussian{mean(0) + gain.dot(resid), std::max(cov(0, 0) - sxy.dot(gain), 0.0)};
  }
  return std::nullopt;
}

/// Same conditional through a pseudo-inverse of the gradient block; eigen
/// directions below rel_tol * largest eigenvalue are dropped.
template <class V, class M, class G>
ConditionalGaussian condition_pinv(const V& mean, const M& cov, const G& g, double rel_tol) {
  const Eigen::Index n = mean.size() - 1;
  if (n == 0 || cov.row(0).tail(n).isZero(0.0)) {
    return ConditionalGaussian{mean(0), std::max(cov(0, 0), 0.0)};
  }
  const M syy = cov.bottomRightCorner(n, n);
  Eigen::SelfAdjointEigenSolver<M> eig(syy);
  const auto& lambda = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
  // Directions with (numerically) zero variance carry no information.
  const V proj = eig.eigenvectors().transpose() * V(cov.col(0).tail(n));
  const V resid = eig.eigenvectors().transpose() * V(g - mean.tail(n));
  double shift = 0.0;
  double explained = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) <= cutoff || lambda(i) <= 0.0) continue;
    shift += proj(i) * resid(i) / lambda(i);
    explained += proj(i) * proj(i) / lambda(i);
  }
  return ConditionalGaussian{mean(0) + shift, std::max(cov(0, 0) - explained, 0.0)};
}

}  // namespace mmbo::detail

#endif  // MMBO_GAUSSIAN_DETAIL_HPP

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

#include "oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <variant>

#include "mmbo/errors.hpp"

namespace mmbo::oracle {
namespace {

// Square root of a PSD covariance; eigen route so singular blocks are fine.
Matrix sqrt_cov(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

template <class Score>
MonteCarloEstimate sample_mean(const JointGaussian& j, std::size_t samples, std::uint64_t seed,
                               Score score) {
  if (samples < 10000) throw InvalidArgument("oracle: at least 1e4 samples");
  const Matrix root = sqrt_cov(j.cov);
  const auto dim = j.mean.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector z(dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
    const Vector draw = j.mean + root * z;
    const double v = score(draw);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
  return {mean, std::sqrt(var / n), samples, seed};
}

bool in_band(const Vector& draw, double eps) {
  for (Eigen::Index i = 1; i < draw.size(); ++i) {
    if (!(std::abs(draw(i)) < eps)) return false;
  }
  return true;
}

Matrix gram(const GPState& state) {
  const auto k = state.size();
  Matrix g(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      g(a, b) = kernel_value(state.kernel(), state.inputs()[a], state.inputs()[b]);
    }
  }
  g.diagonal().array() += state.factor().jitter();
  return g;
}

Vector cross(const GPState& state, const Vector& x) {
  Vector c(state.size());
  for (std::size_t a = 0; a < state.size(); ++a) {
    c(a) = kernel_value(state.kernel(), x, state.inputs()[a]);
  }
  return c;
}

}  // namespace

MonteCarloEstimate mc_joint_probability(const JointGaussian& j, double xi, double eps,
                                        std::size_t samples, std::uint64_t seed) {
  return sample_mean(j, samples, seed, [&](const Vector& d) {
    return (d(0) > xi && in_band(d, eps)) ? 1.0 : 0.0;
  });
}

MonteCarloEstimate mc_joint_ei(const JointGaussian& j, double xi, double eps,
                               std::size_t samples, std::uint64_t seed) {
  return sample_mean(j, samples, seed, [&](const Vector& d) {
    return in_band(d, eps) ? std::max(d(0) - xi, 0.0) : 0.0;
  });
}

JointGaussian product_form(const JointGaussian& j) {
  const auto n = j.mean.size() - 1;
  const ConditionalGaussian c = precision_conditional(j.mean, j.cov, Vector::Zero(n));
  JointGaussian out{j.mean, Matrix::Zero(n + 1, n + 1)};
  out.mean(0) = c.mean;
  out.cov(0, 0) = c.variance;
  for (Eigen::Index i = 1; i <= n; ++i) out.cov(i, i) = j.cov(i, i);
  return out;
}

MonteCarloEstimate mc_product_probability(const JointGaussian& j, double xi, double eps,
                                          std::size_t samples, std::uint64_t seed) {
  return mc_joint_probability(product_form(j), xi, eps, samples, seed);
}

MonteCarloEstimate mc_product_ei(const JointGaussian& j, double xi, double eps,
                                 std::size_t samples, std::uint64_t seed) {
  return mc_joint_ei(product_form(j), xi, eps, samples, seed);
}

MonteCarloEstimate mc_band_diagonal(const JointGaussian& j, double eps, std::size_t samples,
                                    std::uint64_t seed) {
  return sample_mean(product_form(j), samples, seed,
                     [&](const Vector& d) { return in_band(d, eps) ? 1.0 : 0.0; });
}

ConditionalGaussian precision_conditional(const Vector& mean, const Matrix& cov, const Vector& g) {
  const Matrix precision = cov.fullPivLu().inverse();
  const auto n = mean.size() - 1;
  const double lxx = precision(0, 0);
  const double shift = (precision.row(0).tail(n) * (g - mean.tail(n)))(0);
  return {mean(0) - shift / lxx, 1.0 / lxx};
}

double kernel_value(const KernelSpec& spec, const Vector& a, const Vector& b) {
  if (const auto* se = std::get_if<SquaredExponential>(&spec)) {
    const double r2 = (a - b).squaredNorm();
    return se->alpha * std::exp(-r2 / (2.0 * se->length_scale * se->length_scale));
  }
  const auto& p = std::get<Polynomial>(spec);
  return p.alpha_bar * std::pow(a.dot(b) - p.offset, p.degree);
}

double gp_mean(const GPState& state, const Vector& x) {
  Vector resid(state.size());
  for (std::size_t a = 0; a < state.size(); ++a) resid(a) = state.values()[a] - state.prior_mean();
  const Vector w = gram(state).fullPivLu().solve(resid);
  return state.prior_mean() + cross(state, x).dot(w);
}

double gp_variance(const GPState& state, const Vector& x) {
  const Vector c = cross(state, x);
  const Vector w = gram(state).fullPivLu().solve(c);
  return kernel_value(state.kernel(), x, x) - c.dot(w);
}

Vector fd_gradient_gp(const GPState& state, const Vector& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_gradient_gp: h must be positive");
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x;
    Vector down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (gp_mean(state, up) - gp_mean(state, down)) / (2.0 * h);
  }
  return g;
}

JointGaussian fd_joint_posterior(const GPState& state, const Vector& x, double h) {
  const auto n = x.size();
  std::vector<Vector> pts{x};
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector up = x;
    Vector down = x;
    up(i) += h;
    down(i) -= h;
    pts.push_back(up);
    pts.push_back(down);
  }
  const auto m = static_cast<Eigen::Index>(pts.size());
  const auto k = static_cast<Eigen::Index>(state.size());
  Matrix prior(m, m);
  Matrix c(k, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) prior(a, b) = kernel_value(state.kernel(), pts[a], pts[b]);
    for (Eigen::Index s = 0; s < k; ++s) {
      c(s, a) = kernel_value(state.kernel(), pts[a], state.inputs()[static_cast<std::size_t>(s)]);
    }
  }
  Vector resid(k);
  for (Eigen::Index s = 0; s < k; ++s) {
    resid(s) = state.values()[static_cast<std::size_t>(s)] - state.prior_mean();
  }
  const auto lu = gram(state).fullPivLu();
  const Vector mean_pts = Vector::Constant(m, state.prior_mean()) + c.transpose() * lu.solve(resid);
  const Matrix cov_pts = prior - c.transpose() * lu.solve(c);

  // Linear map from point values to (value, differences).
  Matrix t = Matrix::Zero(n + 1, m);
  t(0, 0) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i + 1, 1 + 2 * i) = 1.0 / (2.0 * h);
    t(i + 1, 2 + 2 * i) = -1.0 / (2.0 * h);
  }
  JointGaussian out;
  out.mean = t * mean_pts;
  out.cov = t * cov_pts * t.transpose();
  return out;
}

Vector fd_kernel_grad(const KernelSpec& spec, const Vector& x, const Vector& y, double h) {
  Vector g(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    Vector up = y;
    Vector down = y;
    up(i) += h;
    down(i) -= h;
    g(i) = (kernel_value(spec, up, x) - kernel_value(spec, down, x)) / (2.0 * h);
  }
  return g;
}

Matrix fd_kernel_hess(const KernelSpec& spec, const Vector& y, const Vector& y2, double h) {
  const auto n = y.size();
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          Vector a = y;
          Vector b = y2;
          a(i) += si * h;
          b(j) += sj * h;
          acc += si * sj * kernel_value(spec, a, b);
        }
      }
      m(i, j) = acc / (4.0 * h * h);
    }
  }
  return m;
}

std::vector<Vector> grid_local_maxima(const Objective& f, const Bounds& bounds,
                                      double resolution) {
  if (!(resolution > 0.0)) throw InvalidArgument("grid_local_maxima: resolution must be positive");
  const auto n = bounds.size();
  std::vector<std::size_t> counts(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    counts[i] = static_cast<std::size_t>(
                    std::floor((bounds[i].high - bounds[i].low) / resolution + 1e-9)) +
                1;
    total *= static_cast<double>(counts[i]);
  }
  if (total > 1e8) throw GridTooLarge("grid_local_maxima: more than 1e8 grid points");

  const auto size = static_cast<std::size_t>(total);
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n - 1; i > 0; --i) stride[i - 1] = stride[i] * counts[i];

  auto point_at = [&](std::size_t flat) {
    Vector p(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = (flat / stride[i]) % counts[i];
      p(static_cast<Eigen::Index>(i)) = bounds[i].low + static_cast<double>(idx) * resolution;
    }
    return p;
  };

  std::vector<double> values(size);
  for (std::size_t flat = 0; flat < size; ++flat) values[flat] = f(point_at(flat));

  std::vector<Vector> out;
  for (std::size_t flat = 0; flat < size; ++flat) {
    bool best = true;
    for (std::size_t i = 0; i < n && best; ++i) {
      const std::size_t idx = (flat / stride[i]) % counts[i];
      if (idx > 0 && !(values[flat] > values[flat - stride[i]])) best = false;
      if (idx + 1 < counts[i] && !(values[flat] > values[flat + stride[i]])) best = false;
    }
    if (best) out.push_back(point_at(flat));
  }
  return out;
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double closed_form_ei(double mean, double sd, double xi) {
  if (sd <= 0.0) return std::max(mean - xi, 0.0);
  const double z = (mean - xi) / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return (mean - xi) * (1.0 - upper_tail(z)) + sd * pdf;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace mmbo::oracle

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

#include "mmbo/candidate_posteriors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

constexpr std::size_t kMaxAxisEntries = 1 << 16;
constexpr Eigen::Index kMaxTableDim = 8;

}  // namespace

CandidatePosteriors::CandidatePosteriors(std::vector<Vector> points, KernelSpec kernel,
                                         double prior_mean,
                                         std::span<const double> jitter_schedule)
    : points_(std::move(points)),
      kernel_(std::move(kernel)),
      prior_mean_(prior_mean),
      schedule_(jitter_schedule.begin(), jitter_schedule.end()) {
  validate(kernel_);
  if (points_.empty()) throw EmptyData("candidate posteriors: no query points");
  if (schedule_.empty()) throw InvalidArgument("candidate posteriors: empty jitter schedule");
  if (!std::isfinite(prior_mean_)) throw NonFiniteInput("candidate posteriors: prior mean");
  dim_ = points_.front().size();
  if (dim_ == 0) throw DimensionMismatch("candidate posteriors: zero-dimensional points");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw DimensionMismatch("candidate posteriors: mixed dimensions");
    if (!p.allFinite()) throw NonFiniteInput("candidate posteriors: non-finite point");
  }
  width_ = dim_ + 1;
  const double reach = support_radius(kernel_, kReachTolerance);
  reach2_ = std::isfinite(reach) ? reach * reach : std::numeric_limits<double>::infinity();
  stationary_ = std::holds_alternative<SquaredExponential>(kernel_);
  if (stationary_) {
    const JointKernelBlocks b = joint_blocks(kernel_, points_.front());
    prior_cov_.resize(width_, width_);
    prior_cov_(0, 0) = b.kxx;
    prior_cov_.row(0).tail(dim_) = b.cross.transpose();
    prior_cov_.col(0).tail(dim_) = b.cross;
    prior_cov_.bottomRightCorner(dim_, dim_) = b.hess;
  }
  if (stationary_ && dim_ <= kMaxTableDim) {
    AxisTables t;
    t.coords.resize(dim_);
    std::size_t entries = 0;
    for (Eigen::Index d = 0; d < dim_; ++d) {
      auto& axis = t.coords[d];
      axis.reserve(points_.size());
      for (const auto& p : points_) axis.push_back(p(d));
      std::sort(axis.begin(), axis.end());
      axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
      entries += axis.size();
    }
    if (entries <= kMaxAxisEntries) {
      t.index.resize(points_.size() * dim_);
      for (std::size_t c = 0; c < points_.size(); ++c) {
        for (Eigen::Index d = 0; d < dim_; ++d) {
          const auto& axis = t.coords[d];
          t.index[c * dim_ + d] = static_cast<std::uint32_t>(
              std::lower_bound(axis.begin(), axis.end(), points_[c](d)) - axis.begin());
        }
      }
      t.factor.resize(dim_);
      t.sample.resize(dim_);
      axes_ = std::move(t);
    }
  }
  mean_.assign(points_.size() * width_, 0.0);
  reduction_.assign(points_.size() * width_ * width_, 0.0);
}

bool CandidatePosteriors::cross(const Vector& p, const Vector& s, double* out) const {
  if (const auto* se = std::get_if<SquaredExponential>(&kernel_)) {
    const double inv_l2 = 1.0 / (se->length_scale * se->length_scale);
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < dim_; ++i) r2 += (p(i) - s(i)) * (p(i) - s(i));
    if (r2 > reach2_) return false;
    const double k = se->alpha * std::exp(-0.5 * r2 * inv_l2);
    out[0] = k;
    for (Eigen::Index i = 0; i < dim_; ++i) out[1 + i] = -k * (p(i) - s(i)) * inv_l2;
    return true;
  }
  out[0] = eval(kernel_, p, s);
  const Vector g = grad_second_arg(kernel_, s, p);
  for (Eigen::Index i = 0; i < dim_; ++i) out[1 + i] = g(i);
  return true;
}

void CandidatePosteriors::add(const Vector& x, double value) {
  if (x.size() != dim_) {
    throw DimensionMismatch("candidate posteriors: sample has dimension " +
                            std::to_string(x.size()) + ", expected " + std::to_string(dim_));
  }
  if (!x.allFinite() || !std::isfinite(value)) {
    throw NonFiniteInput("candidate posteriors: non-finite sample");
  }
  if (append(x, value)) return;
  inputs_.push_back(x);
  values_.push_back(value);
  rebuild();
}

bool CandidatePosteriors::append(const Vector& x, double value) {
  const auto k = static_cast<Eigen::Index>(inputs_.size());
  const double jitter = schedule_[jitter_index_];

  Vector kv(k);
  for (Eigen::Index i = 0; i < k; ++i) kv(i) = eval(kernel_, inputs_[i], x);
  const double kxx = eval(kernel_, x, x);
  Vector l = kv;
  if (k > 0) lower_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
  const double pivot2 = kxx + jitter - l.squaredNorm();
  if (!(pivot2 > kPivotFloor * std::max(kxx, 1.0))) return false;
  const double pivot = std::sqrt(pivot2);

  if (lower_.rows() <= k) {
    const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * (k + 1));
    Matrix grown = Matrix::Zero(cap, cap);
    if (k > 0) grown.topLeftCorner(k, k) = lower_.topLeftCorner(k, k);
    lower_ = std::move(grown);
    Vector b = Vector::Zero(cap);
    if (k > 0) b.head(k) = beta_.head(k);
    beta_ = std::move(b);
  }
  lower_.row(k).head(k) = l.transpose();
  lower_(k, k) = pivot;
  const double beta_new = (value - prior_mean_ - (k > 0 ? l.dot(beta_.head(k)) : 0.0)) / pivot;
  beta_(k) = beta_new;

  // v = (a(x) - sum_i w_i a(x_i)) / pivot with w = L^{-T} l.
  Vector w = l;
  if (k > 0) {
    lower_.topLeftCorner(k, k).triangularView<Eigen::Lower>().transpose().solveInPlace(w);
  }

  if (axes_) {
    store_axis_factors(x, static_cast<std::size_t>(k));
    const double alpha = std::get<SquaredExponential>(kernel_).alpha;
    std::vector<double> coef(static_cast<std::size_t>(k) + 1);
    for (Eigen::Index i = 0; i < k; ++i) coef[i] = alpha * w(i);
    coef[k] = -alpha;
    switch (dim_) {
      case 1: update_from_tables<1>(coef, pivot, beta_new); break;
      case 2: update_from_tables<2>(coef, pivot, beta_new); break;
      case 3: update_from_tables<3>(coef, pivot, beta_new); break;
      default: update_from_tables<0>(coef, pivot, beta_new); break;
    }
    inputs_.push_back(x);
    values_.push_back(value);
    return true;
  }

  const auto width = static_cast<std::size_t>(width_);
  std::vector<double> a(width), v(width);
  for (std::size_t c = 0; c < points_.size(); ++c) {
    const Vector& p = points_[c];
    if (!cross(p, x, v.data())) std::fill(v.begin(), v.end(), 0.0);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!cross(p, inputs_[i], a.data())) continue;
      for (std::size_t j = 0; j < width; ++j) v[j] -= w(i) * a[j];
    }
    double* m = mean_.data() + c * width;
    double* s = reduction_.data() + c * width * width;
    for (std::size_t j = 0; j < width; ++j) {
      v[j] /= pivot;
      m[j] += v[j] * beta_new;
    }
    for (std::size_t r = 0; r < width; ++r) {
      for (std::size_t j = 0; j < width; ++j) s[r * width + j] += v[r] * v[j];
    }
  }
  inputs_.push_back(x);
  values_.push_back(value);
  return true;
}

void CandidatePosteriors::store_axis_factors(const Vector& x, std::size_t k) {
  AxisTables& t = *axes_;
  if (k >= t.capacity) {
    const std::size_t cap = std::max<std::size_t>(16, 2 * (k + 1));
    for (Eigen::Index d = 0; d < dim_; ++d) {
      const std::size_t rows = t.coords[d].size();
      std::vector<double> grown(rows * cap, 0.0);
      for (std::size_t j = 0; j < rows; ++j) {
        std::copy_n(t.factor[d].begin() + static_cast<std::ptrdiff_t>(j * t.capacity), k,
                    grown.begin() + static_cast<std::ptrdiff_t>(j * cap));
      }
      t.factor[d] = std::move(grown);
      t.sample[d].resize(cap, 0.0);
    }
    t.capacity = cap;
  }
  const double l = std::get<SquaredExponential>(kernel_).length_scale;
  const double scale = -0.5 / (l * l);
  for (Eigen::Index d = 0; d < dim_; ++d) {
    const auto& axis = t.coords[d];
    for (std::size_t j = 0; j < axis.size(); ++j) {
      const double diff = axis[j] - x(d);
      t.factor[d][j * t.capacity + k] = std::exp(scale * diff * diff);
    }
    t.sample[d][k] = x(d);
  }
}

template <int Dim>
void CandidatePosteriors::update_from_tables(const std::vector<double>& coef, double pivot,
                                             double beta_new) {
  const AxisTables& t = *axes_;
  const int dims = Dim > 0 ? Dim : static_cast<int>(dim_);
  const std::size_t width = static_cast<std::size_t>(dims) + 1;
  const std::size_t n = coef.size();
  const double l = std::get<SquaredExponential>(kernel_).length_scale;
  const double grad_scale = 1.0 / (l * l * pivot);
  const double* samples[kMaxTableDim];
  for (int d = 0; d < dims; ++d) samples[d] = t.sample[d].data();

  for (std::size_t c = 0; c < points_.size(); ++c) {
    const std::uint32_t* id = t.index.data() + c * static_cast<std::size_t>(dims);
    const double* rows[kMaxTableDim];
    for (int d = 0; d < dims; ++d) rows[d] = t.factor[d].data() + id[d] * t.capacity;
    // With k_i = coef_i * k(p, x_i): s0 = sum k_i, sd[d] = sum k_i x_i[d].
    double s0 = 0.0;
    double sd[kMaxTableDim] = {};
    for (std::size_t i = 0; i < n; ++i) {
      double kv = coef[i];
      for (int d = 0; d < dims; ++d) kv *= rows[d][i];
      s0 += kv;
      for (int d = 0; d < dims; ++d) sd[d] += kv * samples[d][i];
    }
    double v[kMaxTableDim + 1];
    v[0] = -s0 / pivot;
    const Vector& p = points_[c];
    for (int d = 0; d < dims; ++d) v[1 + d] = (p(d) * s0 - sd[d]) * grad_scale;

    double* m = mean_.data() + c * width;
    double* r = reduction_.data() + c * width * width;
    for (std::size_t j = 0; j < width; ++j) m[j] += v[j] * beta_new;
    for (std::size_t a = 0; a < width; ++a) {
      for (std::size_t b = 0; b < width; ++b) r[a * width + b] += v[a] * v[b];
    }
  }
}

void CandidatePosteriors::rebuild() {
  std::vector<Vector> inputs = std::move(inputs_);
  std::vector<double> values = std::move(values_);
  for (;;) {
    if (++jitter_index_ >= schedule_.size()) {
      jitter_index_ = schedule_.size() - 1;
      throw NotPositiveDefinite("candidate posteriors: jitter schedule exhausted at " +
                                std::to_string(inputs.size()) + " samples");
    }
    inputs_.clear();
    values_.clear();
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(reduction_.begin(), reduction_.end(), 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < inputs.size() && ok; ++i) ok = append(inputs[i], values[i]);
    if (ok) return;
  }
}

void CandidatePosteriors::posterior(std::size_t index, std::span<double> mean,
                                    std::span<double> cov) const {
  if (index >= points_.size()) throw InvalidArgument("candidate posteriors: index out of range");
  const auto width = static_cast<std::size_t>(width_);
  if (mean.size() != width || cov.size() != width * width) {
    throw DimensionMismatch("candidate posteriors: output buffers have the wrong size");
  }
  const double* m = mean_.data() + index * width;
  const double* s = reduction_.data() + index * width * width;
  Matrix blocks;
  const Matrix* prior = &prior_cov_;
  if (!stationary_) {
    const JointKernelBlocks b = joint_blocks(kernel_, points_[index]);
    blocks.resize(width_, width_);
    blocks(0, 0) = b.kxx;
    blocks.row(0).tail(dim_) = b.cross.transpose();
    blocks.col(0).tail(dim_) = b.cross;
    blocks.bottomRightCorner(dim_, dim_) = b.hess;
    prior = &blocks;
  }
  for (std::size_t i = 0; i < width; ++i) mean[i] = m[i];
  mean[0] += prior_mean_;
  for (std::size_t i = 0; i < width; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const double k0 = 0.5 * ((*prior)(i, j) + (*prior)(j, i));
      cov[i * width + j] = k0 - 0.5 * (s[i * width + j] + s[j * width + i]);
    }
    cov[i * width + i] = std::max(cov[i * width + i], 0.0);
  }
}

JointGaussian CandidatePosteriors::posterior(std::size_t index) const {
  Vector mean(width_);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cov(width_, width_);
  posterior(index, std::span<double>(mean.data(), mean.size()),
            std::span<double>(cov.data(), cov.size()));
  return JointGaussian{std::move(mean), Matrix(cov)};
}

}  // namespace mmbo

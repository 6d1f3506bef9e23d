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

#include "mmbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaussian_detail.hpp"
#include "mmbo/errors.hpp"

namespace mmbo {

std::string_view to_string(AcquisitionFamily family) {
  switch (family) {
    case AcquisitionFamily::JointPI:
      return "joint_pi";
    case AcquisitionFamily::JointEI:
      return "joint_ei";
    case AcquisitionFamily::VanillaPI:
      return "vanilla_pi";
    case AcquisitionFamily::VanillaEI:
      return "vanilla_ei";
    case AcquisitionFamily::DerivativeOnly:
      return "derivative_only";
  }
  return "unknown";
}

std::optional<AcquisitionFamily> parse_acquisition_family(std::string_view name) {
  for (auto f : {AcquisitionFamily::JointPI, AcquisitionFamily::JointEI,
                 AcquisitionFamily::VanillaPI, AcquisitionFamily::VanillaEI,
                 AcquisitionFamily::DerivativeOnly}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

void validate(const AcquisitionConfig& cfg) {
  if (!std::isfinite(cfg.threshold)) throw InvalidArgument("acquisition: threshold must be finite");
  const bool uses_band = cfg.family == AcquisitionFamily::JointPI ||
                         cfg.family == AcquisitionFamily::JointEI ||
                         cfg.family == AcquisitionFamily::DerivativeOnly;
  if (uses_band && !(cfg.epsilon > 0.0)) {
    throw InvalidArgument("acquisition: epsilon must be > 0");
  }
}

double probability_of_improvement(double mean, double sd, double threshold) {
  if (!(sd > 0.0)) return mean > threshold ? 1.0 : 0.0;
  return q_function((threshold - mean) / sd);
}

double expected_improvement(double mean, double sd, double threshold) {
  if (!(sd > 0.0)) return std::max(mean - threshold, 0.0);
  const double z = (threshold - mean) / sd;
  const double ei = (mean - threshold) * q_function(z) + sd * normal_pdf(z);
  return std::max(ei, 0.0);
}

namespace {

template <class V, class M>
double score(const V& mean, const M& cov, const AcquisitionConfig& cfg) {
  const double xi = cfg.threshold;
  switch (cfg.family) {
    case AcquisitionFamily::VanillaPI:
      return probability_of_improvement(mean(0), std::sqrt(std::max(cov(0, 0), 0.0)), xi);
    case AcquisitionFamily::VanillaEI:
      return expected_improvement(mean(0), std::sqrt(std::max(cov(0, 0), 0.0)), xi);
    case AcquisitionFamily::DerivativeOnly:
      return detail::band_probability(mean, cov, cfg.epsilon);
    case AcquisitionFamily::JointPI:
    case AcquisitionFamily::JointEI: {
      const double band = detail::band_probability(mean, cov, cfg.epsilon);
      if (band == 0.0) return 0.0;
      const V zero = V::Zero(mean.size() - 1);
      const auto chol = detail::condition_cholesky(mean, cov, zero, default_jitter_schedule());
      const ConditionalGaussian cond = chol ? *chol : detail::condition_pinv(mean, cov, zero, 1e-9);
      const double sd = std::sqrt(cond.variance);
      const double value = cfg.family == AcquisitionFamily::JointPI
                               ? probability_of_improvement(cond.mean, sd, xi)
                               : expected_improvement(cond.mean, sd, xi);
      return value * band;
    }
  }
  throw InvalidArgument("acquisition: unknown family");
}

}  // namespace

double acquisition_value(const JointGaussian& joint, const AcquisitionConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) validate(cfg);
  return score(joint.mean, joint.cov, cfg);
}

double acquisition_value(std::span<const double> mean, std::span<const double> cov,
                         const AcquisitionConfig& cfg) {
  const auto width = static_cast<Eigen::Index>(mean.size());
  if (width < 1 || cov.size() != mean.size() * mean.size()) {
    throw DimensionMismatch("acquisition: covariance does not match mean");
  }
  if (!(cfg.epsilon > 0.0)) validate(cfg);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> c(cov.data(), width, width);
  const Eigen::Map<const Vector> m(mean.data(), width);
  if (width <= detail::kSmallGradientDim + 1) {
    return score(detail::SmallVector(m), detail::SmallMatrix(c), cfg);
  }
  return score(Vector(m), Matrix(c), cfg);
}

namespace {

double evaluate_family(const GPState& state, const Vector& x, const AcquisitionConfig& cfg,
                       AcquisitionFamily expected, const char* name) {
  if (cfg.family != expected) {
    throw InvalidArgument(std::string(name) + ": configured family is " +
                          std::string(to_string(cfg.family)));
  }
  validate(cfg);
  return acquisition_value(joint_posterior(state, x), cfg);
}

}  // namespace

double joint_pi(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  return evaluate_family(state, x, cfg, AcquisitionFamily::JointPI, "joint_pi");
}

double joint_ei(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  return evaluate_family(state, x, cfg, AcquisitionFamily::JointEI, "joint_ei");
}

double vanilla_pi(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  return evaluate_family(state, x, cfg, AcquisitionFamily::VanillaPI, "vanilla_pi");
}

double vanilla_ei(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  return evaluate_family(state, x, cfg, AcquisitionFamily::VanillaEI, "vanilla_ei");
}

double derivative_only(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  return evaluate_family(state, x, cfg, AcquisitionFamily::DerivativeOnly, "derivative_only");
}

double evaluate_acquisition(const GPState& state, const Vector& x, const AcquisitionConfig& cfg) {
  validate(cfg);
  return acquisition_value(joint_posterior(state, x), cfg);
}

bool is_flagged_optimum(const GPState& state, const Vector& x, double observed,
                        const AcquisitionConfig& cfg) {
  const bool gradient_ok = posterior_mean_gradient(state, x).norm() <= cfg.epsilon;
  if (cfg.family == AcquisitionFamily::DerivativeOnly) return gradient_ok;
  return gradient_ok && observed >= cfg.threshold;
}

}  // namespace mmbo

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

#ifndef MMBO_ACQUISITION_HPP
#define MMBO_ACQUISITION_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mmbo/gp.hpp"

namespace mmbo {

enum class AcquisitionFamily { JointPI, JointEI, VanillaPI, VanillaEI, DerivativeOnly };

std::string_view to_string(AcquisitionFamily family);
std::optional<AcquisitionFamily> parse_acquisition_family(std::string_view name);

struct AcquisitionConfig {
  AcquisitionFamily family = AcquisitionFamily::JointPI;
  double threshold = 0.0;  // xi, in objective units
  double epsilon = 0.1;    // half-width of the gradient band
};

void validate(const AcquisitionConfig& cfg);

/// Q((xi - mean) / sd), with the sd -> 0 limit as a step function.
double probability_of_improvement(double mean, double sd, double threshold);

/// E[(f - xi)^+] for f ~ N(mean, sd^2).
double expected_improvement(double mean, double sd, double threshold);

/// Acquisition value of an already computed joint posterior.
double acquisition_value(const JointGaussian& joint, const AcquisitionConfig& cfg);

/// Same, for (1 + n) means and a row-major (1 + n)^2 covariance that is
/// symmetric with a non-negative diagonal. Allocation-free for small n.
double acquisition_value(std::span<const double> mean, std::span<const double> cov,
                         const AcquisitionConfig& cfg);

/// P(f > xi | grad f = 0) * P(|grad f| < eps).
double joint_pi(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);
/// EI of the gradient-conditioned value distribution times the band probability.
double joint_ei(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);
double vanilla_pi(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);
double vanilla_ei(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);
double derivative_only(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);

/// Dispatches on cfg.family.
double evaluate_acquisition(const GPState& state, const Vector& x, const AcquisitionConfig& cfg);

/// Whether an observation is reported as a located optimum.
///
/// `state` must already include the observation at x. The value condition
/// (observed >= xi) applies to every family that scores the objective value;
/// DerivativeOnly has no threshold and is judged on the gradient alone.
bool is_flagged_optimum(const GPState& state, const Vector& x, double observed,
                        const AcquisitionConfig& cfg);

}  // namespace mmbo

#endif  // MMBO_ACQUISITION_HPP

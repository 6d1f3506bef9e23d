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

#ifndef MMBO_OBJECTIVES_HPP
#define MMBO_OBJECTIVES_HPP

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmbo/numerics.hpp"

namespace mmbo {

using Objective = std::function<double(const Vector&)>;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

using Bounds = std::vector<Interval>;

void validate_bounds(const Bounds& bounds);
bool within_bounds(const Bounds& bounds, const Vector& x);

struct GroundTruth {
  Vector location;
  double value = 0.0;
};

/// An objective to maximize, with its known local maxima inside `bounds`.
struct BenchmarkSpec {
  std::string name;
  Bounds bounds;
  std::vector<GroundTruth> ground_truth;  // empty when unknown
  Objective objective;

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(bounds.size()); }
};

/// 1 + sum x_i^2 / 4000 - prod cos(x_i / sqrt(i)), i from 1.
double griewank(const Vector& x);

/// Product of the two five-term Shubert sums; x must be 2-dimensional.
double shubert(const Vector& x);

struct Bump {
  double height = 1.0;
  double center = 0.5;
  double width = 0.1;
};

/// Mixture of Gaussian bumps on [0, 1].
double synthetic1d(double x, std::span<const Bump> bumps);

/// Four bumps with distinct heights.
std::vector<Bump> default_bumps();

/// Throws InvalidArgument for empty lists, non-positive widths or non-finite values.
void validate_bumps(std::span<const Bump> bumps);

/// Grid surface with nearest-grid-point lookup.
class TabulatedSurface {
 public:
  /// values are row-major over the axes (last axis varies fastest).
  TabulatedSurface(std::vector<std::string> axis_names, std::vector<std::vector<double>> axes,
                   std::vector<double> values);

  const std::vector<std::string>& axis_names() const { return axis_names_; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(axes_.size()); }
  Bounds bounds() const;

  /// Throws OutOfBounds outside the bounding box of the grid.
  double operator()(const Vector& x) const;

  /// Grid index (flattened) and coordinates of every node, in storage order.
  std::size_t node_count() const { return values_.size(); }
  Vector node(std::size_t flat) const;

  /// Nodes strictly greater than every existing axis neighbor.
  std::vector<GroundTruth> local_maxima() const;

 private:
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  std::vector<std::string> axis_names_;
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

/// CSV: header of axis names followed by `value`, one row per node, any order.
/// Throws ParseError carrying the offending line number.
TabulatedSurface load_tabulated(const std::filesystem::path& path);
TabulatedSurface parse_tabulated(std::istream& in);
void write_tabulated(const TabulatedSurface& surface, const std::filesystem::path& path);

double eval_tabulated(const TabulatedSurface& surface, const Vector& x);

/// Local maxima of a smooth objective: grid scan at `step`, then each
/// candidate is polished by a bounded pattern search. Maxima that end on the
/// box boundary are dropped.
std::vector<GroundTruth> locate_local_maxima(const Objective& objective, const Bounds& bounds,
                                             double step);

BenchmarkSpec griewank_benchmark(const Bounds& bounds);
BenchmarkSpec shubert_benchmark(const Bounds& bounds);
BenchmarkSpec synthetic1d_benchmark(std::vector<Bump> bumps);
BenchmarkSpec tabulated_benchmark(TabulatedSurface surface);

/// Euclidean distance from x to the closest registered maximum.
double nearest_truth_distance(const BenchmarkSpec& spec, const Vector& x);

/// Index of the closest registered maximum.
std::size_t nearest_truth_index(const BenchmarkSpec& spec, const Vector& x);

}  // namespace mmbo

#endif  // MMBO_OBJECTIVES_HPP

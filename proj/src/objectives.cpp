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

#include "mmbo/objectives.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "mmbo/errors.hpp"

namespace mmbo {

void validate_bounds(const Bounds& bounds) {
  if (bounds.empty()) throw InvalidArgument("bounds: at least one dimension is required");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
      throw InvalidArgument("bounds: dimension " + std::to_string(i + 1) +
                            " needs finite low < high");
    }
  }
}

bool within_bounds(const Bounds& bounds, const Vector& x) {
  if (x.size() != static_cast<Eigen::Index>(bounds.size())) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto& b = bounds[static_cast<std::size_t>(i)];
    if (!(x(i) >= b.low && x(i) <= b.high)) return false;
  }
  return true;
}

double griewank(const Vector& x) {
  double sum = 0.0;
  double prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) / 4000.0;
    prod *= std::cos(x(i) / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + sum - prod;
}

namespace {

double shubert_sum(double t) {
  double s = 0.0;
  for (int i = 1; i <= 5; ++i) s += i * std::cos((i + 1) * t + i);
  return s;
}

}  // namespace

double shubert(const Vector& x) {
  if (x.size() != 2) throw DimensionMismatch("shubert: input must be 2-dimensional");
  return shubert_sum(x(0)) * shubert_sum(x(1));
}

double synthetic1d(double x, std::span<const Bump> bumps) {
  validate_bumps(bumps);
  double f = 0.0;
  for (const auto& b : bumps) {
    const double z = (x - b.center) / b.width;
    f += b.height * std::exp(-0.5 * z * z);
  }
  return f;
}

std::vector<Bump> default_bumps() {
  return {
      {1.00, 0.15, 0.050},
      {0.40, 0.40, 0.040},
      {0.75, 0.62, 0.045},
      {0.55, 0.86, 0.040},
  };
}

void validate_bumps(std::span<const Bump> bumps) {
  if (bumps.empty()) throw InvalidArgument("synthetic1d: bump list is empty");
  for (const auto& b : bumps) {
    if (!std::isfinite(b.height) || !std::isfinite(b.center) || !(b.width > 0.0) ||
        !std::isfinite(b.width)) {
      throw InvalidArgument("synthetic1d: every bump needs finite height/center and width > 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Tabulated surface

TabulatedSurface::TabulatedSurface(std::vector<std::string> axis_names,
                                   std::vector<std::vector<double>> axes,
                                   std::vector<double> values)
    : axis_names_(std::move(axis_names)), axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty()) throw InvalidArgument("tabulated: no axes");
  if (axis_names_.size() != axes_.size()) throw InvalidArgument("tabulated: axis name count");
  std::size_t total = 1;
  for (const auto& axis : axes_) {
    if (axis.empty()) throw InvalidArgument("tabulated: empty axis");
    if (!std::is_sorted(axis.begin(), axis.end()) ||
        std::adjacent_find(axis.begin(), axis.end()) != axis.end()) {
      throw InvalidArgument("tabulated: axis coordinates must be strictly increasing");
    }
    total *= axis.size();
  }
  if (total != values_.size()) {
    throw InvalidArgument("tabulated: " + std::to_string(values_.size()) + " values for a grid of " +
                          std::to_string(total));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("tabulated: non-finite value");
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size() - 1; d > 0; --d) {
    strides_[d - 1] = strides_[d] * axes_[d].size();
  }
}

Bounds TabulatedSurface::bounds() const {
  Bounds b;
  for (const auto& axis : axes_) b.push_back({axis.front(), axis.back()});
  return b;
}

std::vector<std::size_t> TabulatedSurface::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    idx[d] = flat / strides_[d];
    flat %= strides_[d];
  }
  return idx;
}

Vector TabulatedSurface::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vector x(dimension());
  for (std::size_t d = 0; d < axes_.size(); ++d) x(static_cast<Eigen::Index>(d)) = axes_[d][idx[d]];
  return x;
}

double TabulatedSurface::operator()(const Vector& x) const {
  if (x.size() != dimension()) throw DimensionMismatch("tabulated: query dimension");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const auto& axis = axes_[d];
    const double q = x(static_cast<Eigen::Index>(d));
    if (!(q >= axis.front() && q <= axis.back())) {
      throw OutOfBounds("tabulated: coordinate " + std::to_string(q) + " outside axis " +
                        axis_names_[d]);
    }
    auto hi = std::lower_bound(axis.begin(), axis.end(), q);
    std::size_t i = static_cast<std::size_t>(hi - axis.begin());
    if (hi != axis.begin() && (hi == axis.end() || *hi != q)) {
      // Between axis[i-1] and axis[i]: ties go to the lower coordinate.
      if (hi == axis.end() || q - *(hi - 1) <= *hi - q) i -= 1;
    }
    flat += i * strides_[d];
  }
  return values_[flat];
}

std::vector<GroundTruth> TabulatedSurface::local_maxima() const {
  std::vector<GroundTruth> out;
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    const auto idx = unflatten(flat);
    const double v = values_[flat];
    bool is_max = true;
    for (std::size_t d = 0; d < axes_.size() && is_max; ++d) {
      if (idx[d] > 0 && !(v > values_[flat - strides_[d]])) is_max = false;
      if (idx[d] + 1 < axes_[d].size() && !(v > values_[flat + strides_[d]])) is_max = false;
    }
    if (is_max) out.push_back({node(flat), v});
  }
  return out;
}

double eval_tabulated(const TabulatedSurface& surface, const Vector& x) { return surface(x); }

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ParseError("not a number: '" + text + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite number: '" + text + "'", line);
  return v;
}

}  // namespace

TabulatedSurface parse_tabulated(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 2) throw ParseError("header needs at least one axis and `value`", line_no);
  if (header.back() != "value") throw ParseError("last header column must be `value`", line_no);
  const std::size_t dims = header.size() - 1;
  std::vector<std::string> names(header.begin(), header.end() - 1);

  std::vector<std::pair<std::vector<double>, std::size_t>> rows;  // coords+value, line
  std::vector<double> row_values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> coords(dims);
    for (std::size_t d = 0; d < dims; ++d) coords[d] = parse_number(fields[d], line_no);
    row_values.push_back(parse_number(fields.back(), line_no));
    rows.emplace_back(std::move(coords), line_no);
  }
  if (rows.empty()) throw ParseError("no data rows", line_no);

  std::vector<std::vector<double>> axes(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    for (const auto& r : rows) axes[d].push_back(r.first[d]);
    std::sort(axes[d].begin(), axes[d].end());
    axes[d].erase(std::unique(axes[d].begin(), axes[d].end()), axes[d].end());
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  std::vector<double> values(total, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> strides(dims, 1);
  for (std::size_t d = dims - 1; d > 0; --d) strides[d - 1] = strides[d] * axes[d].size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      const auto it = std::lower_bound(axes[d].begin(), axes[d].end(), rows[r].first[d]);
      flat += static_cast<std::size_t>(it - axes[d].begin()) * strides[d];
    }
    if (!std::isnan(values[flat])) throw ParseError("duplicate grid point", rows[r].second);
    values[flat] = row_values[r];
  }
  if (rows.size() != total) {
    throw ParseError("table has " + std::to_string(rows.size()) + " rows but the grid needs " +
                         std::to_string(total),
                     line_no);
  }
  return TabulatedSurface(std::move(names), std::move(axes), std::move(values));
}

TabulatedSurface load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_tabulated(in);
}

void write_tabulated(const TabulatedSurface& surface, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& name : surface.axis_names()) out << name << ',';
  out << "value\n";
  char buf[64];
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  for (std::size_t flat = 0; flat < surface.node_count(); ++flat) {
    const Vector x = surface.node(flat);
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      put(x(d));
      out << ',';
    }
    put(surface.values()[flat]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Ground-truth registries

namespace {

Vector clamp_to(const Bounds& bounds, Vector x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto& b = bounds[static_cast<std::size_t>(i)];
    x(i) = std::clamp(x(i), b.low, b.high);
  }
  return x;
}

// Bounded compass search; converges to a local maximum near `start`.
GroundTruth polish(const Objective& f, const Bounds& bounds, Vector x, double step) {
  double best = f(x);
  while (step > 1e-11) {
    bool moved = false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector y = x;
        y(i) += sign * step;
        y = clamp_to(bounds, std::move(y));
        const double v = f(y);
        if (v > best) {
          best = v;
          x = std::move(y);
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return {std::move(x), best};
}

bool on_boundary(const Bounds& bounds, const Vector& x) {
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    const double v = x(static_cast<Eigen::Index>(d));
    if (v <= bounds[d].low || v >= bounds[d].high) return true;
  }
  return false;
}

std::vector<std::size_t> grid_counts(const Bounds& bounds, double step) {
  std::vector<std::size_t> counts;
  double total = 1.0;
  for (const auto& b : bounds) {
    const auto c = static_cast<std::size_t>(std::llround((b.high - b.low) / step)) + 1;
    counts.push_back(std::max<std::size_t>(c, 2));
    total *= static_cast<double>(counts.back());
  }
  if (total > 1e8) throw GridTooLarge("locate_local_maxima: grid exceeds 1e8 points");
  return counts;
}

}  // namespace

std::vector<GroundTruth> locate_local_maxima(const Objective& objective, const Bounds& bounds,
                                             double step) {
  validate_bounds(bounds);
  if (!(step > 0.0)) throw InvalidArgument("locate_local_maxima: step must be > 0");
  const auto counts = grid_counts(bounds, step);
  const std::size_t dims = bounds.size();
  std::vector<std::size_t> strides(dims, 1);
  for (std::size_t d = dims - 1; d > 0; --d) strides[d - 1] = strides[d] * counts[d];
  const std::size_t total = strides[0] * counts[0];

  auto coord = [&](std::size_t d, std::size_t i) {
    const auto& b = bounds[d];
    return b.low + (b.high - b.low) * static_cast<double>(i) / static_cast<double>(counts[d] - 1);
  };
  std::vector<double> values(total);
  Vector x(static_cast<Eigen::Index>(dims));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t d = 0; d < dims; ++d) {
      x(static_cast<Eigen::Index>(d)) = coord(d, rem / strides[d]);
      rem %= strides[d];
    }
    values[flat] = objective(x);
  }

  std::vector<GroundTruth> found;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    bool is_max = true;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t i = rem / strides[d];
      rem %= strides[d];
      x(static_cast<Eigen::Index>(d)) = coord(d, i);
      if (i > 0 && !(values[flat] > values[flat - strides[d]])) is_max = false;
      if (i + 1 < counts[d] && !(values[flat] > values[flat + strides[d]])) is_max = false;
    }
    if (!is_max) continue;
    GroundTruth t = polish(objective, bounds, x, 0.5 * step);
    if (on_boundary(bounds, t.location)) continue;
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const GroundTruth& g) {
      return (g.location - t.location).norm() < 0.5 * step;
    });
    if (!duplicate) found.push_back(std::move(t));
  }
  return found;
}

BenchmarkSpec griewank_benchmark(const Bounds& bounds) {
  validate_bounds(bounds);
  const std::size_t dims = bounds.size();
  // Maxima sit near x_i = k_i * pi * sqrt(i) with sum k_i odd.
  std::vector<std::vector<int>> ranges(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double unit = std::numbers::pi * std::sqrt(static_cast<double>(d + 1));
    const int lo = static_cast<int>(std::floor(bounds[d].low / unit)) - 1;
    const int hi = static_cast<int>(std::ceil(bounds[d].high / unit)) + 1;
    for (int k = lo; k <= hi; ++k) ranges[d].push_back(k);
  }
  Objective f = [](const Vector& x) { return griewank(x); };
  std::vector<GroundTruth> truths;
  std::vector<std::size_t> idx(dims, 0);
  while (true) {
    int parity = 0;
    Vector seed(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
      const int k = ranges[d][idx[d]];
      parity += k;
      seed(static_cast<Eigen::Index>(d)) = k * std::numbers::pi * std::sqrt(static_cast<double>(d + 1));
    }
    if ((parity % 2 != 0) && within_bounds(bounds, seed)) {
      GroundTruth t = polish(f, bounds, seed, 0.05);
      // Maxima pushed onto the boundary by clamping are not interior optima.
      if (!on_boundary(bounds, t.location)) truths.push_back(std::move(t));
    }
    std::size_t d = 0;
    while (d < dims && ++idx[d] == ranges[d].size()) idx[d++] = 0;
    if (d == dims) break;
  }
  return {"griewank", bounds, std::move(truths), f};
}

BenchmarkSpec shubert_benchmark(const Bounds& bounds) {
  validate_bounds(bounds);
  if (bounds.size() != 2) throw DimensionMismatch("shubert: bounds must be 2-dimensional");
  Objective f = [](const Vector& x) { return shubert(x); };
  return {"shubert", bounds, locate_local_maxima(f, bounds, 0.005), f};
}

BenchmarkSpec synthetic1d_benchmark(std::vector<Bump> bumps) {
  validate_bumps(bumps);
  Objective f = [bumps](const Vector& x) { return synthetic1d(x(0), bumps); };
  Bounds bounds{{0.0, 1.0}};
  return {"synthetic1d", bounds, locate_local_maxima(f, bounds, 1e-4), f};
}

BenchmarkSpec tabulated_benchmark(TabulatedSurface surface) {
  auto shared = std::make_shared<const TabulatedSurface>(std::move(surface));
  Objective f = [shared](const Vector& x) { return (*shared)(x); };
  return {"tabulated", shared->bounds(), shared->local_maxima(), f};
}

std::size_t nearest_truth_index(const BenchmarkSpec& spec, const Vector& x) {
  if (spec.ground_truth.empty()) throw NoGroundTruth("benchmark has no registered maxima");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.ground_truth.size(); ++i) {
    const auto& loc = spec.ground_truth[i].location;
    if (loc.size() != x.size()) throw DimensionMismatch("nearest_truth_distance: dimension");
    const double d = (loc - x).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double nearest_truth_distance(const BenchmarkSpec& spec, const Vector& x) {
  return (spec.ground_truth[nearest_truth_index(spec, x)].location - x).norm();
}

}  // namespace mmbo

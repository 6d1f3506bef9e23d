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
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mmbo/errors.hpp"
#include "mmbo/objectives.hpp"
#include "oracle.hpp"

using namespace mmbo;

namespace {

// Direct five-term sum, written out independently of the library.
double shubert_factor(double x) {
  double s = 0.0;
  for (int i = 1; i <= 5; ++i) s += i * std::cos((i + 1) * x + i);
  return s;
}

void check_certificate(const BenchmarkSpec& spec) {
  for (const GroundTruth& t : spec.ground_truth) {
    CAPTURE(t.location.transpose());
    CHECK(within_bounds(spec.bounds, t.location));
    const double v = spec.objective(t.location);
    CHECK(v == doctest::Approx(t.value).epsilon(1e-12));
    for (Eigen::Index d = 0; d < t.location.size(); ++d) {
      for (double s : {-1e-3, 1e-3}) {
        Vector y = t.location;
        y(d) += s;
        if (within_bounds(spec.bounds, y)) CHECK(v >= spec.objective(y));
      }
    }
  }
}

// Each registered truth has an oracle maximum within tol, and vice versa.
void check_matches_oracle(const BenchmarkSpec& spec, const std::vector<Vector>& oracle, double tol) {
  REQUIRE(spec.ground_truth.size() == oracle.size());
  for (const Vector& o : oracle) CHECK(nearest_truth_distance(spec, o) <= tol);
}

// Grid maxima on the box faces are artifacts of truncating the domain.
std::vector<Vector> interior(const std::vector<Vector>& pts, const Bounds& bounds) {
  std::vector<Vector> out;
  for (const Vector& p : pts) {
    bool inside = true;
    for (std::size_t d = 0; d < bounds.size(); ++d) {
      const double v = p(static_cast<Eigen::Index>(d));
      if (v <= bounds[d].low || v >= bounds[d].high) inside = false;
    }
    if (inside) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("griewank values") {
  CHECK(griewank(Vector::Zero(3)) == 0.0);
  CHECK(std::abs(griewank(Vector{{0.0, -4.4, 0.0}}) - 2.004) <= 1e-3);
  CHECK(std::abs(griewank(Vector{{0.0, 4.4, -0.1}}) - 2.003) <= 1e-3);
  // 1 + sum x^2/4000 - prod cos(x_i / sqrt(i)), evaluated by hand.
  const Vector x{{1.0, 2.0, 3.0}};
  const double expected = 1.0 + 14.0 / 4000.0 -
                          std::cos(1.0) * std::cos(2.0 / std::sqrt(2.0)) * std::cos(3.0 / std::sqrt(3.0));
  CHECK(griewank(x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("shubert values") {
  double s = 0.0;
  for (int i = 1; i <= 5; ++i) s += i * std::cos(i);
  CHECK(shubert(Vector{{0.0, 0.0}}) == doctest::Approx(s * s).epsilon(1e-14));
  CHECK(std::abs(shubert(Vector{{0.0, 0.0}}) - 19.876) <= 1e-3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(shubert(Vector{{a, b}}) == shubert(Vector{{b, a}}));
    CHECK(shubert(Vector{{a, b}}) == doctest::Approx(shubert_factor(a) * shubert_factor(b)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(shubert(Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("shubert global minimum on [-10,10]^2 by 1e-3 grid search") {
  // The function is a product of identical factors, so the 2D grid minimum is
  // attained at a pair of 1D grid extrema; scan the 1D grid exhaustively.
  double lo = INFINITY, hi = -INFINITY, x_lo = 0.0, x_hi = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -10.0 + 1e-3 * i;
    const double g = shubert_factor(x);
    if (g < lo) lo = g, x_lo = x;
    if (g > hi) hi = g, x_hi = x;
  }
  const double grid_min = std::min({lo * hi, lo * lo, hi * hi});
  CHECK(std::abs(grid_min - (-186.7309)) <= 1e-3);
  CHECK(shubert(Vector{{x_lo, x_hi}}) == doctest::Approx(grid_min).epsilon(1e-12));
}

TEST_CASE("synthetic 1D bumps") {
  const std::vector<Bump> one{{1.0, 0.5, 0.1}};
  CHECK(synthetic1d(0.5, one) == 1.0);
  for (double off : {0.61, 0.7, 1.0}) {
    CHECK(synthetic1d(0.5 + off * 1.0, one) < 1e-6);
    CHECK(synthetic1d(0.5 - off, one) < 1e-6);
  }
  CHECK_THROWS_AS(synthetic1d(0.5, std::vector<Bump>{}), InvalidArgument);
  CHECK_THROWS_AS(synthetic1d(0.5, std::vector<Bump>{{1.0, 0.5, 0.0}}), InvalidArgument);

  const BenchmarkSpec spec = synthetic1d_benchmark(default_bumps());
  const auto oracle = oracle::grid_local_maxima(spec.objective, spec.bounds, 1e-5);
  CHECK(oracle.size() == 4);
  check_matches_oracle(spec, oracle, 2e-5);
  check_certificate(spec);
  // The three largest maxima have distinct heights.
  std::vector<double> heights;
  for (const auto& t : spec.ground_truth) heights.push_back(t.value);
  std::sort(heights.rbegin(), heights.rend());
  CHECK(heights[0] > heights[1]);
  CHECK(heights[1] > heights[2]);
}

TEST_CASE("griewank ground truth") {
  const BenchmarkSpec g2 = griewank_benchmark({{-5, 5}, {-5, 5}});
  REQUIRE(g2.ground_truth.size() == 4);
  const auto oracle2 = interior(oracle::grid_local_maxima(g2.objective, g2.bounds, 0.01), g2.bounds);
  CHECK(oracle2.size() == 4);
  check_matches_oracle(g2, oracle2, 0.01);
  const double pi = std::numbers::pi;
  for (const Vector& expect : {Vector{{pi, 0.0}}, Vector{{-pi, 0.0}}, Vector{{0.0, std::sqrt(2.0) * pi}},
                               Vector{{0.0, -std::sqrt(2.0) * pi}}}) {
    // Exact maxima sit slightly inward of the cosine peaks.
    CHECK(nearest_truth_distance(g2, expect) < 0.02);
  }
  check_certificate(g2);

  const BenchmarkSpec g3 = griewank_benchmark({{-5, 5}, {-5, 5}, {-5, 5}});
  CHECK(g3.ground_truth.size() == 4);
  const auto oracle3 = interior(oracle::grid_local_maxima(g3.objective, g3.bounds, 0.05), g3.bounds);
  check_matches_oracle(g3, oracle3, 0.05);
  check_certificate(g3);
}

TEST_CASE("shubert ground truth on [-2,0]^2") {
  const BenchmarkSpec spec = shubert_benchmark({{-2, 0}, {-2, 0}});
  CHECK(spec.ground_truth.size() >= 3);
  const auto oracle = interior(oracle::grid_local_maxima(spec.objective, spec.bounds, 0.002), spec.bounds);
  check_matches_oracle(spec, oracle, 0.005);
  check_certificate(spec);
}

TEST_CASE("nearest truth distance") {
  const BenchmarkSpec g3 = griewank_benchmark({{-5, 5}, {-5, 5}, {-5, 5}});
  CHECK(nearest_truth_distance(g3, g3.ground_truth[0].location) == 0.0);
  const Vector x{{-3.0, -0.2, 0.0}};
  const double pi = std::numbers::pi;
  CHECK(std::abs((x - Vector{{-pi, 0.0, 0.0}}).norm() - 0.245) <= 1e-3);
  CHECK(std::abs(nearest_truth_distance(g3, x) - 0.245) <= 0.01);
  CHECK(std::abs((x - Vector{{-3.1, 0.0, 0.0}}).norm() - 0.224) <= 1e-3);

  BenchmarkSpec two{"two", {{0, 1}, {0, 1}}, {{Vector{{0.0, 0.0}}, 1.0}, {Vector{{1.0, 0.5}}, 1.0}}, {}};
  CHECK(nearest_truth_distance(two, Vector{{0.5, 0.25}}) ==
        doctest::Approx(0.5 * std::hypot(1.0, 0.5)).epsilon(1e-15));
  BenchmarkSpec none{"none", {{0, 1}}, {}, {}};
  CHECK_THROWS_AS(nearest_truth_distance(none, Vector{{0.5}}), NoGroundTruth);
}

TEST_CASE("tabulated surface") {
  const TabulatedSurface s({"a", "b"}, {{0.0, 1.0}, {0.0, 2.0}}, {1.0, 2.0, 3.0, 4.0});
  CHECK(s(Vector{{0.0, 0.0}}) == 1.0);
  CHECK(s(Vector{{0.0, 2.0}}) == 2.0);
  CHECK(s(Vector{{1.0, 0.0}}) == 3.0);
  CHECK(s(Vector{{1.0, 2.0}}) == 4.0);
  // Equidistant: lower coordinate wins.
  CHECK(s(Vector{{0.5, 0.0}}) == 1.0);
  CHECK(s(Vector{{0.0, 1.0}}) == 1.0);
  CHECK(s(Vector{{0.51, 1.01}}) == 4.0);
  CHECK_THROWS_AS(s(Vector{{1.5, 0.0}}), OutOfBounds);
  CHECK_THROWS_AS(s(Vector{{0.5}}), DimensionMismatch);
  CHECK(s.local_maxima().size() == 1);
  CHECK_THROWS_AS(TabulatedSurface({"a"}, {{0.0, 1.0}}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(TabulatedSurface({"a"}, {{1.0, 0.0}}, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("tabulated round trip and parse errors") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> values(4 * 3);
  for (double& v : values) v = u(rng);
  const TabulatedSurface s({"width", "layer"}, {{5.0, 15.0, 25.0, 35.0}, {0.0, 25.0, 50.0}}, values);
  const auto path = std::filesystem::temp_directory_path() / "mmbo_tabulated_roundtrip.csv";
  write_tabulated(s, path);
  const TabulatedSurface back = load_tabulated(path);
  std::filesystem::remove(path);
  REQUIRE(back.node_count() == s.node_count());
  for (std::size_t i = 0; i < s.node_count(); ++i) CHECK(back(s.node(i)) == s.values()[i]);
  CHECK(back.axis_names() == s.axis_names());

  // Row order is free.
  std::istringstream shuffled("x,value\n1,5\n0,4\n");
  const TabulatedSurface t = parse_tabulated(shuffled);
  CHECK(t(Vector{{0.0}}) == 4.0);

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_tabulated(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("x,value\n0,1\n1,abc\n") == 3);
  CHECK(line_of("x,value\n0,1\n1\n") == 3);
  CHECK(line_of("x,y\n0,1\n") == 1);
  CHECK(line_of("x,value\n0,1\n0,2\n") == 3);
  CHECK_THROWS_AS(load_tabulated("/nonexistent/mmbo.csv"), ParseError);
}

TEST_CASE("bundled tabulated surface") {
  const TabulatedSurface s = load_tabulated(std::string(MMBO_SOURCE_DIR) + "/data/cifar_surface_placeholder.csv");
  CHECK(s.dimension() == 2);
  CHECK(s.bounds()[0].low == 5.0);
  CHECK(s.bounds()[0].high == 35.0);
  CHECK(s.bounds()[1].low == 0.0);
  CHECK(s.bounds()[1].high == 50.0);
  CHECK(!tabulated_benchmark(s).ground_truth.empty());
}

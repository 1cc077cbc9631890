#include "discount/metrics.hpp"

#include "discount/rng.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace discount;
using discount::testing::random_points;

TEST_CASE("coverage: pinned examples and threshold monotonicity") {
  CHECK(coverage(Vector::Constant(5, 0.9)) == doctest::Approx(1.0));
  CHECK(coverage(Vector::Constant(5, 0.1)) == doctest::Approx(0.0));

  Vector mixed(4);
  mixed << 0.6, 0.4, 0.7, 0.2;
  CHECK(coverage(mixed) == doctest::Approx(0.5));

  double previous = 1.0;
  for (double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double value = coverage(mixed, threshold);
    CHECK(value <= previous + 1e-15);
    previous = value;
  }

  CHECK_THROWS_AS(coverage(Vector()), std::invalid_argument);
  CHECK_THROWS_AS(coverage(Vector::Constant(3, 1.2)), std::invalid_argument);
}

TEST_CASE("mmd_sq: identity, singleton formula, separated clusters") {
  Rng rng(81);
  const auto x = random_points(rng, 12, 3);
  CHECK(std::abs(mmd_sq(x.points, x.points)) < 1e-12);

  Matrix a(1, 2), b(1, 2);
  a << 0.0, 0.0;
  b << 1.0, 2.0;
  const double h = 1.5;
  const double expected = 2.0 - 2.0 * std::exp(-5.0 / (2.0 * h * h));
  CHECK(mmd_sq(a, b, h) == doctest::Approx(expected));
  CHECK(expected >= 0.0);

  // Widely separated tight clusters with h=1: cross-kernel vanishes and both
  // self-terms approach 1.
  Matrix near = 0.001 * rng.normal_matrix(10, 2);
  Matrix far = near.array() + 1000.0;
  CHECK(mmd_sq(near, far, 1.0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("mmd_sq: symmetry, nonnegativity, degenerate median") {
  Rng rng(82);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_points(rng, 8, 2);
    const auto y = random_points(rng, 11, 2, 0.5);
    const double xy = mmd_sq(x.points, y.points);
    const double yx = mmd_sq(y.points, x.points);
    CHECK(xy == doctest::Approx(yx));
    CHECK(xy >= -1e-9);
  }
  const Matrix identical = Matrix::Constant(4, 2, 3.0);
  CHECK(mmd_sq(identical, identical) == 0.0);
}

TEST_CASE("diversity: pinned examples") {
  CHECK(diversity(Matrix::Constant(5, 2, 1.0)) == doctest::Approx(0.0));

  Matrix pair(2, 1);
  pair << 0.0, 3.0;
  CHECK(diversity(pair) == doctest::Approx(3.0));

  Matrix collinear(3, 1);
  collinear << 0.0, 1.0, 2.0;
  CHECK(diversity(collinear) == doctest::Approx(4.0 / 3.0));

  CHECK(diversity(Matrix::Zero(1, 3)) == 0.0);
}

TEST_CASE("diversity: permutation and translation invariant, scales linearly") {
  Rng rng(83);
  const auto x = random_points(rng, 9, 3);
  const double base = diversity(x.points);

  Matrix reversed = x.points.colwise().reverse();
  CHECK(diversity(reversed) == doctest::Approx(base));

  Matrix shifted = x.points.array() + 7.3;
  CHECK(diversity(shifted) == doctest::Approx(base));

  Matrix scaled = 2.5 * x.points;
  CHECK(diversity(scaled) == doctest::Approx(2.5 * base));
}

TEST_CASE("dpc: pinned values and the undefined case") {
  CHECK(dpc(1.0, 2.0, 0.5) == doctest::Approx(0.25));
  CHECK(dpc(3.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(dpc(2.0, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(dpc(1.0, 0.0, 0.5), UndefinedScore);
}

TEST_CASE("percentile_diffs: identity, uniform scaling, floor") {
  Rng rng(84);
  Matrix base = rng.normal_matrix(50, 1).array() + 10.0;  // keep positive
  const std::vector<double> levels{0.1, 0.5, 0.9};

  const auto zero = percentile_diffs(base, base, levels);
  for (const auto& [level, value] : zero) CHECK(value == doctest::Approx(0.0));

  Matrix scaled = 1.1 * base;
  const auto shifted = percentile_diffs(base, scaled, levels);
  for (const auto& [level, value] : shifted) {
    CHECK(value == doctest::Approx(0.10).epsilon(1e-9));
  }

  Matrix zeros = Matrix::Zero(10, 1);
  Matrix ones = Matrix::Constant(10, 1, 1.0);
  const auto floored = percentile_diffs(zeros, ones, {0.5}, 1e-6);
  CHECK(std::isfinite(floored.at(0.5)));
  CHECK(floored.at(0.5) == doctest::Approx(1e6));
}

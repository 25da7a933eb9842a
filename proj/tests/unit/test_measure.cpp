// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmtherm/errors.hpp"
#include "mmtherm/measure.hpp"

using namespace mmtherm;
using std::numbers::pi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }
const DensityFn one = [](const Vector&) { return 1.0; };

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("region areas under a constant density") {
    const Triangle tri{{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 1)}};
    CHECK(integrate(one, tri) == doctest::Approx(1.0).epsilon(1e-10));
    Ellipse e;
    e.shape << 4, 0, 0, 1;
    CHECK(integrate(one, e) == doctest::Approx(pi / 2).epsilon(1e-10));
    CHECK(integrate(one, Box{{{-1, 1}, {0, 3}}}) == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(integrate(one, Ball{3, 1.0}) == doctest::Approx(4 * pi / 3).epsilon(1e-10));
    CHECK(sphere_area(3) == doctest::Approx(4 * pi));
    CHECK(sphere_area(5) == doctest::Approx(8 * pi * pi / 3));
  }

  TEST_CASE("region queries") {
    const Triangle tri{{Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}};
    const auto s = slice(tri, 0, 0.5);
    CHECK(s.a == doctest::Approx(0.0));
    CHECK(s.b == doctest::Approx(0.5));
    CHECK(axis_range(tri, 1).b == doctest::Approx(1.0));
    Vector p(2);
    p << 0.0, 0.5;
    CHECK(contains(tri, p));
    p << 0.9, 0.5;
    CHECK_FALSE(contains(tri, p));
    CHECK(region_dim(Ball{5, 1.0}) == 5);
  }

  TEST_CASE("normalization of an inverse-square-root weight") {
    const Prior p = normalize_prior([](const Vector& x) { return 1 / std::sqrt(1 - x(0) * x(0)); }, Interval{-1, 1});
    CHECK(p.normalization() == doctest::Approx(pi).epsilon(1e-10));
    CHECK(p.density(v1(0.0)) == doctest::Approx(1 / pi));
    CHECK(expectation(p, [](const Vector& x) { return x(0) * x(0); }) == doctest::Approx(0.5).epsilon(1e-10));
  }

  TEST_CASE("improper weight is rejected") {
    CHECK_THROWS_AS(normalize_prior([](const Vector& x) { return std::pow(1 - x(0) * x(0), -1.5); }, Interval{-1, 1}),
                    DivergenceError);
  }

  TEST_CASE("marginal of a product density") {
    Ellipse disk;
    const Prior p = normalize_prior(one, disk, 1e-10, {"x", "y"});
    const Tabulated1D m = marginal(p, 0, 41);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double x = m.x()[i];
      CHECK(m.density()[i] == doctest::Approx(2 * std::sqrt(1 - x * x) / pi).epsilon(1e-9));
    }
    CHECK(m.integral() == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("tabulated densities interpolate monotonically and round-trip through CSV") {
    const auto t = Tabulated1D::from_function([](double x) { return 3 * x * x / 2; }, -1, 1, 51);
    CHECK(t.integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t(0.3) == doctest::Approx(1.5 * 0.09).epsilon(1e-3));
    for (double x = -1; x <= 1; x += 0.01) CHECK(t(x) >= 0.0);
    const auto back = Tabulated1D::from_csv(t.to_csv({"note"}));
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.density()[i] == t.density()[i]);
    CHECK(back.integral() == doctest::Approx(1.0).epsilon(1e-12));
    const auto u = Tabulated1D::from_function([](double) { return 0.5; }, -1, 1, 11, Tabulated1D::Grid::Uniform);
    CHECK(u.integral() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("shrink limit of an improper ball weight") {
    // (1 − r²)^{-3/2} on the 3-ball: uniform limit marginal on [−1, 1].
    const auto res = shrink_limit_marginal([](const Vector& x) { return std::pow(1 - x.squaredNorm(), -1.5); }, Ball{3, 1.0},
                                           0, {}, 101);
    const auto m = res.marginal.normalized();
    for (double d : m.density()) CHECK(d == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(res.residual < kShrinkResidualTol);
  }

  TEST_CASE("shrink limit of a proper weight equals its marginal") {
    // (1 − r²)^{-1/2} on the 3-ball is normalizable with marginal 2 sqrt(1 − x²)/π.
    const DensityFn w = [](const Vector& x) { return std::pow(1 - x.squaredNorm(), -0.5); };
    const auto res = shrink_limit_marginal(w, Ball{3, 1.0}, 0, {}, 21).marginal.normalized();
    for (std::size_t i = 0; i < res.size(); ++i) {
      const double x = res.x()[i];
      CHECK(res.density()[i] == doctest::Approx(2 * std::sqrt(1 - x * x) / pi).epsilon(1e-5));
    }
  }

  TEST_CASE("divergence probe") {
    const auto div = probe_divergence([](double x) { return 1 / (1 - x * x); }, -1, 1);
    CHECK(div.divergent);
    const auto conv = probe_divergence([](double x) { return 1 / std::sqrt(1 - x * x); }, -1, 1);
    CHECK_FALSE(conv.divergent);
    CHECK(conv.estimates.back() == doctest::Approx(pi).epsilon(1e-4));
  }

  TEST_CASE("memoize returns identical values") {
    int calls = 0;
    const DensityFn f = memoize([&](const Vector& x) {
      ++calls;
      return x(0) * 2;
    });
    CHECK(f(v1(0.25)) == 0.5);
    CHECK(f(v1(0.25)) == 0.5);
    CHECK(calls == 1);
  }
}

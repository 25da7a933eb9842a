// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "../support/oracles.hpp"
#include "mmtherm/errors.hpp"
#include "mmtherm/scenarios.hpp"
#include "mmtherm/thermo.hpp"

using namespace mmtherm;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// Uniform density on [−1, 1]: Q = sinh(β)/β, E = −langevin(β).
Prior uniform() { return normalize_prior([](const Vector&) { return 1.0; }, Interval{-1, 1}, 1e-12, {"x"}); }

}  // namespace

TEST_SUITE("thermo") {
  TEST_CASE("uniform prior thermodynamics against closed forms") {
    const Prior p = uniform();
    const EnergyObservable obs{v1(1.0), 1.0};
    for (double b : {0.1, 1.0, 4.0}) {
      const auto pt = thermo_point(p, obs, b);
      CHECK(pt.q == doctest::Approx(std::sinh(b) / b).epsilon(1e-11));
      CHECK(pt.e == doctest::Approx(-oracle::langevin(b)).epsilon(1e-10));
      CHECK(partition(p, obs, b) == doctest::Approx(pt.q));
      CHECK(energy_mean(p, obs, b) == doctest::Approx(pt.e));
      // d²logQ/dβ² = Var.
      const double d = 1e-3;
      const double var_fd = (std::log(partition(p, obs, b + d)) - 2 * std::log(pt.q) + std::log(partition(p, obs, b - d))) / (d * d);
      CHECK(energy_variance(p, obs, b) == doctest::Approx(var_fd).epsilon(1e-5));
    }
    const auto zero = thermo_point(p, obs, 0.0);
    CHECK(zero.q == doctest::Approx(1.0));
    CHECK(zero.var == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }

  TEST_CASE("energy scale enters through beta h only") {
    const Prior p = uniform();
    const auto a = thermo_point(p, {v1(1.0), 2.0}, 0.5);
    const auto b = thermo_point(p, {v1(1.0), 1.0}, 1.0);
    CHECK(a.q == doctest::Approx(b.q));
    CHECK(a.e == doctest::Approx(2.0 * b.e));
  }

  TEST_CASE("Boltzmann overflow is refused") {
    CHECK_THROWS_AS(thermo_point(uniform(), {v1(1.0), 1.0}, 2 * kMaxBetaH), DomainError);
  }

  TEST_CASE("beta grid parsing") {
    const auto g = parse_beta_grid("0:1:0.25");
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK(parse_beta_grid("2").size() == 1);
    CHECK_THROWS_AS(parse_beta_grid("1:0:0.1"), DomainError);
    CHECK_THROWS_AS(parse_beta_grid("0:1:0"), DomainError);
    CHECK_THROWS_AS(parse_beta_grid("0:1"), DomainError);
    CHECK_THROWS_AS(parse_beta_grid("a:b:c"), DomainError);
  }

  TEST_CASE("closed forms at beta -> 0 and a reference value") {
    for (const char* id : {"s21", "s22", "s23", "s24", "s25-4", "s26-3", "s3", "bloch-min", "quat-min", "quat-max", "single-min"}) {
      CAPTURE(id);
      CHECK(closed_form_q(id, 1e-6) == doctest::Approx(1.0).epsilon(1e-5));
    }
    CHECK(closed_form_energy("single-min", 1.0) == doctest::Approx(-oracle::bessel_i(2, 1) / oracle::bessel_i(1, 1)).epsilon(1e-12));
    CHECK(closed_form_q("s24", 2.0) == doctest::Approx(std::exp(2.0 / 3) * oracle::bessel_i(0, 4.0 / 3)).epsilon(1e-12));
    CHECK_FALSE(closed_form("s25-3").has_value());
    CHECK_THROWS_AS(closed_form_q("s25-3", 1.0), DomainError);
  }

  TEST_CASE("curve serialization") {
    const auto cf = closed_form("s22");
    const auto c = thermo_curve(uniform(), {v1(1.0), 1.0}, {0.0, 0.5, 1.0}, &*cf);
    const std::string csv = c.to_csv();
    CHECK(csv.rfind("beta,Q_num,Q_closed,E_num,E_closed,Var_num,residual_Q,residual_E\n", 0) == 0);
    for (const auto& r : c.rows) CHECK(r.residual_q < 1e-10);
    const auto j = nlohmann::json::parse(c.to_json());
    CHECK(j.dump().find("Q_num") != std::string::npos);
    const auto bare = thermo_curve(uniform(), {v1(1.0), 1.0}, {1.0});
    CHECK_FALSE(bare.has_closed);
    CHECK(bare.to_csv().find("1,") != std::string::npos);
  }

  TEST_CASE("single-min curve at beta h = 1") {
    const auto c = scenario_thermo_curve(get_scenario("single-min"), MetricKind::Minimal, {1.0}, 1.0);
    CHECK(c.rows[0].e_num == doctest::Approx(-0.2401937).epsilon(1e-6));
  }

  TEST_CASE("worker count honours MMTHERM_THREADS") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK(worker_count() >= 1);
    CHECK_THROWS(parallel_for(4, [](std::size_t i) {
      if (i == 2) throw DomainError("boom");
    }));
  }
}

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "mmtherm/errors.hpp"
#include "mmtherm/metric.hpp"
#include "mmtherm/scenarios.hpp"

using namespace mmtherm;

namespace {

std::vector<Eigen::MatrixXcd> dirs(const AffineFamily& f) {
  std::vector<Eigen::MatrixXcd> d;
  for (Eigen::Index k = 0; k < f.param_count(); ++k) d.push_back(f.direction(k));
  return d;
}

Vector point(double a, double b) {
  Vector t(2);
  t << a, b;
  return t;
}

}  // namespace

TEST_SUITE("metric") {
  TEST_CASE("kind names") {
    CHECK(parse_metric_kind("minimal") == MetricKind::Minimal);
    CHECK(parse_metric_kind("maximal") == MetricKind::Maximal);
    CHECK(to_string(MetricKind::Maximal) == "maximal");
    CHECK_THROWS_AS(parse_metric_kind("bogus"), DomainError);
  }

  TEST_CASE("noncommuting family: both kernels against the eigensolver oracle") {
    const auto& fam = *get_scenario("s23").family;
    for (const Vector& t : {point(0.1, 0.2), point(-0.3, 0.05), point(0.0, 0.0)}) {
      const auto o = oracle::metric_tensors(fam(t), dirs(fam));
      CHECK((bures_tensor(fam, t) - o.minimal).norm() < 1e-12 * o.minimal.norm());
      CHECK((maximal_tensor(fam, t) - o.maximal).norm() < 1e-12 * o.maximal.norm());
      CHECK((sld_cross_check(fam, t) - oracle::sld_tensor(fam(t), dirs(fam))).norm() < 1e-11);
    }
  }

  TEST_CASE("maximal dominates minimal") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    const auto& fam = *get_scenario("s22").family;
    for (int i = 0; i < 30; ++i) {
      const Vector t = point(u(rng), u(rng));
      if (min_eigenvalue(fam(t)) < 1e-3) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> es(maximal_tensor(fam, t) - bures_tensor(fam, t));
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
  }

  TEST_CASE("commuting family reduces to a quarter of the classical Fisher information") {
    // For commuting ρ and Bₖ the eigenvalues p_i have slopes (Bₖ)_ii in the joint eigenbasis.
    const auto& fam = *get_scenario("s21").family;
    const Vector t = point(0.1, 0.2);
    Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(fam(t));
    const HermitianMatrix v = es.eigenvectors();
    Matrix fisher = Matrix::Zero(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double p = es.eigenvalues()(i);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          fisher(k, l) += (v.col(i).adjoint() * fam.direction(k) * v.col(i))(0).real() *
                          (v.col(i).adjoint() * fam.direction(l) * v.col(i))(0).real() / p;
    }
    CHECK((bures_tensor(fam, t) - fisher / 4).norm() < 1e-13);
    CHECK((maximal_tensor(fam, t) - fisher / 4).norm() < 1e-13);
    const MetricEvaluator fast(fam, MetricKind::Minimal), general(fam, MetricKind::Minimal, false);
    CHECK(fast.commuting());
    CHECK_FALSE(general.commuting());
    CHECK(fast.volume(t) == doctest::Approx(general.volume(t)).epsilon(1e-13));
  }

  TEST_CASE("boundary behaviour") {
    const auto& fam = *get_scenario("s23").family;
    // Bisect along the first axis for the point where ρ becomes singular.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (min_eigenvalue(fam(point(mid, 0.0))) > 0.0 ? lo : hi) = mid;
    }
    const Vector edge = point(lo, 0.0);
    CHECK_THROWS_AS(maximal_tensor(fam, edge), InfeasibleError);
    const MetricEvaluator ev(fam, MetricKind::Maximal, false);
    double v = -1.0;
    CHECK_NOTHROW(v = ev.quadrature_volume(edge));
    CHECK(v >= 0.0);
    CHECK_THROWS_AS(ev.quadrature_volume(point(hi + 0.1, 0.0)), InfeasibleError);
  }

  TEST_CASE("volume element of a tensor") {
    Matrix g(2, 2);
    g << 4, 0, 0, 9;
    CHECK(volume_element(g) == doctest::Approx(6.0));
  }
}

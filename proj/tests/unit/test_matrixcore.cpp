// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "mmtherm/matrixcore.hpp"
#include "mmtherm/scenarios.hpp"

using namespace mmtherm;

namespace {

HermitianMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HermitianMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_SUITE("matrixcore") {
  TEST_CASE("Pauli words multiply out as Kronecker products") {
    const HermitianMatrix x = pauli_word_matrix({1}), y = pauli_word_matrix({2}), z = pauli_word_matrix({3});
    const HermitianMatrix i2 = HermitianMatrix::Identity(2, 2);
    CHECK((x * x - i2).norm() < 1e-15);
    CHECK((x * y - std::complex<double>(0, 1) * z).norm() < 1e-15);
    const HermitianMatrix xz = pauli_word_matrix({1, 3});
    HermitianMatrix kron(4, 4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) kron.block(2 * a, 2 * b, 2, 2) = x(a, b) * z;
    CHECK((xz - kron).norm() < 1e-15);
    CHECK(is_hermitian(pauli_word_matrix({2, 2, 1})));
  }

  TEST_CASE("every scenario family has unit trace on feasible points") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto& id : scenario_ids()) {
      const auto& s = get_scenario(id);
      if (!s.family || s.family->param_count() != s.dim()) continue;
      const Box box = bounding_box(s.region);
      for (int i = 0; i < 20; ++i) {
        Vector t(s.dim());
        for (int k = 0; k < s.dim(); ++k) t(k) = box.sides[k].a + (box.sides[k].b - box.sides[k].a) * u(rng);
        if (!contains(s.region, t)) continue;
        CHECK(std::abs((*s.family)(t).trace() - 1.0) < 1e-12);
      }
    }
  }

  TEST_CASE("density is affine with the stored directions") {
    const auto& fam = *get_scenario("s21").family;
    Vector t(2);
    t << 0.1, -0.2;
    for (Eigen::Index k = 0; k < 2; ++k) {
      Vector tp = t;
      tp(k) += 0.25;
      CHECK(((eval_density(fam, tp) - eval_density(fam, t)) / 0.25 - fam.direction(k)).norm() < 1e-14);
    }
  }

  TEST_CASE("Jacobi eigensystem against Eigen up to n = 64") {
    std::mt19937_64 rng(7);
    for (Eigen::Index n : {1, 2, 5, 16, 64}) {
      const HermitianMatrix h = random_hermitian(n, rng);
      const auto es = eigensystem(h);
      CHECK((reconstruct(es) - h).norm() <= 1e-12 * h.norm());
      CHECK((es.eigenvectors.adjoint() * es.eigenvectors - HermitianMatrix::Identity(n, n)).norm() < 1e-12);
      for (Eigen::Index i = 1; i < n; ++i) CHECK(es.eigenvalues(i - 1) >= es.eigenvalues(i));
      Eigen::SelfAdjointEigenSolver<HermitianMatrix> ref(h);
      for (Eigen::Index i = 0; i < n; ++i) CHECK(es.eigenvalues(i) == doctest::Approx(ref.eigenvalues()(n - 1 - i)).epsilon(1e-12));
    }
  }

  TEST_CASE("degenerate clusters stay orthonormal") {
    // Diagonal with a threefold eigenvalue, conjugated by a random unitary.
    std::mt19937_64 rng(3);
    const HermitianMatrix h = random_hermitian(6, rng);
    Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(h);
    const HermitianMatrix u = es.eigenvectors();
    Vector d(6);
    d << 0.5, 0.5, 0.5, 0.2, -0.1, -0.1;
    const HermitianMatrix m = u * d.cast<std::complex<double>>().asDiagonal() * u.adjoint();
    const auto mine = eigensystem(m);
    CHECK((mine.eigenvectors.adjoint() * mine.eigenvectors - HermitianMatrix::Identity(6, 6)).norm() < 1e-12);
    CHECK((reconstruct(mine) - m).norm() < 1e-12);
  }

  TEST_CASE("feasibility of the two-spin family") {
    const auto& fam = *get_scenario("s21").family;
    Vector t(2);
    t << 0.0, 0.0;
    CHECK(is_feasible(fam, t));
    t << 0.9, 0.0;
    CHECK_FALSE(is_feasible(fam, t));
    CHECK(min_eigenvalue(fam(Vector::Zero(2))) == doctest::Approx(0.25));
  }

  TEST_CASE("family specs round-trip through JSON") {
    const std::vector<ParameterSpec> spec{{"xi1", {{{1, 0}, 1.0}, {{0, 1}, 1.0}}}, {"zeta11", {{{1, 1}, 1.0}}}};
    const AffineFamily a = build_family(spec);
    const AffineFamily b = family_from_json(family_spec_to_json(spec));
    REQUIRE(b.param_count() == 2);
    CHECK(b.name(1) == "zeta11");
    for (Eigen::Index k = 0; k < 2; ++k) CHECK((a.direction(k) - b.direction(k)).norm() < 1e-15);
    CHECK((a.base() - HermitianMatrix::Identity(4, 4) / 4.0).norm() < 1e-15);
    CHECK_THROWS_AS(family_from_json("{\"dim\":3,\"params\":[]}"), DomainError);
  }
}

// SPDX-License-Identifier: Apache-2.0
//
// Complex Hermitian matrix algebra: Pauli tensor products, affine density
// families and a cyclic Jacobi eigensolver.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmtherm/errors.hpp"

namespace mmtherm {

template <typename Real>
using HermitianMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RealVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using HermitianMatrix = HermitianMatrixT<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-14;
inline constexpr double kFeasibilityTol = 1e-10;

/// Tensor-factor letters: 0 = identity, 1..3 = Pauli x, y, z.
struct PauliWord {
  std::vector<std::uint8_t> letters;

  PauliWord() = default;
  PauliWord(std::initializer_list<int> l) {
    for (int c : l) letters.push_back(static_cast<std::uint8_t>(c));
  }
  explicit PauliWord(std::vector<std::uint8_t> l) : letters(std::move(l)) {}

  std::size_t size() const { return letters.size(); }
  bool operator==(const PauliWord&) const = default;
};

/// Kronecker product of the 2x2 Pauli matrices in word order (first letter = most significant factor).
HermitianMatrix pauli_word_matrix(const PauliWord& word);

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// Affine families ρ(θ) = B₀ + Σ θₖ Bₖ

struct PauliTerm {
  PauliWord word;
  double coeff = 1.0;
};

struct ParameterSpec {
  std::string name;
  std::vector<PauliTerm> terms;
};

class AffineFamily {
 public:
  struct Parameter {
    std::string name;
    HermitianMatrix direction;
  };

  AffineFamily(HermitianMatrix base, std::vector<Parameter> params);

  Eigen::Index dim() const { return base_.rows(); }
  Eigen::Index param_count() const { return static_cast<Eigen::Index>(params_.size()); }
  const HermitianMatrix& base() const { return base_; }
  const HermitianMatrix& direction(Eigen::Index k) const { return params_.at(static_cast<std::size_t>(k)).direction; }
  const std::string& name(Eigen::Index k) const { return params_.at(static_cast<std::size_t>(k)).name; }
  const std::vector<Parameter>& parameters() const { return params_; }

  HermitianMatrix operator()(const Vector& theta) const;

 private:
  HermitianMatrix base_;
  std::vector<Parameter> params_;
};

/// Family with base I/2^m and Bₖ = Σ coeff·pauli_word_matrix(word)/2^m.
AffineFamily build_family(std::span<const ParameterSpec> spec);

/// Parses {"dim":4,"params":[{"name":..,"terms":[{"word":[1,0],"coeff":1.0},..]}]}.
AffineFamily family_from_json(const std::string& text);
std::string family_spec_to_json(std::span<const ParameterSpec> spec);

HermitianMatrix eval_density(const AffineFamily& family, const Vector& theta);

// ---------------------------------------------------------------------------
// Eigendecomposition

template <typename Real>
struct EigenSystemT {
  RealVectorT<Real> eigenvalues;       // descending
  HermitianMatrixT<Real> eigenvectors;  // column i pairs with eigenvalues(i)
};
using EigenSystem = EigenSystemT<double>;

namespace detail {

template <typename Real>
void jacobi_rotate(HermitianMatrixT<Real>& a, HermitianMatrixT<Real>& v, Eigen::Index p, Eigen::Index q) {
  using Complex = std::complex<Real>;
  const Complex apq = a(p, q);
  const Real g = std::abs(apq);
  const Complex phase = apq / g;
  const Real app = a(p, p).real();
  const Real aqq = a(q, q).real();

  const Real zeta = (aqq - app) / (Real(2) * g);
  Real t = Real(1) / (std::abs(zeta) + std::sqrt(Real(1) + zeta * zeta));
  if (zeta < 0) t = -t;
  const Real c = Real(1) / std::sqrt(Real(1) + t * t);
  const Real s = t * c;

  // Unitary acting on columns p, q: [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]].
  const Complex u_pp = c;
  const Complex u_pq = s;
  const Complex u_qp = -s * std::conj(phase);
  const Complex u_qq = c * std::conj(phase);

  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * u_pp + akq * u_qp;
    a(k, q) = akp * u_pq + akq * u_qq;
  }
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
    a(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
  }
  a(p, q) = a(q, p) = Complex(0);
  a(p, p) = Complex(app - t * g);
  a(q, q) = Complex(aqq + t * g);

  for (Eigen::Index k = 0; k < v.rows(); ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = vkp * u_pp + vkq * u_qp;
    v(k, q) = vkp * u_pq + vkq * u_qq;
  }
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Vectors inside a degenerate cluster
/// (gap below `cluster_tol`) are re-orthonormalized, and every eigenvector is
/// phased so that its first component of non-negligible modulus is real and
/// positive.
template <typename Derived>
EigenSystemT<typename Eigen::NumTraits<typename Derived::Scalar>::Real> eigensystem(
    const Eigen::MatrixBase<Derived>& input, double cluster_tol = 1e-10) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using Complex = std::complex<Real>;
  using Mat = HermitianMatrixT<Real>;

  if (input.rows() != input.cols() || input.rows() == 0) throw DomainError("eigensystem: matrix must be square and nonempty");
  const Real scale = std::max(Real(1), input.cwiseAbs().maxCoeff());
  if (!is_hermitian(input, static_cast<double>(kHermitianTol * scale) * 100))
    throw DomainError("eigensystem: matrix is not Hermitian");

  const Eigen::Index n = input.rows();
  Mat a = input.template cast<Complex>();
  a = (a + a.adjoint()).eval() * Real(0.5);
  Mat v = Mat::Identity(n, n);

  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= eps * Real(1e-6) * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Real g = std::abs(a(p, q));
        if (g == Real(0)) continue;
        // Skip rotations that cannot change the diagonal at working precision.
        if (sweep > 3 && g < eps * Real(1e-3) * (std::abs(a(p, p).real()) + std::abs(a(q, q).real())) ) {
          a(p, q) = a(q, p) = Complex(0);
          continue;
        }
        detail::jacobi_rotate<Real>(a, v, p, q);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

  EigenSystemT<Real> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]).real();
    out.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }

  // Modified Gram-Schmidt inside degenerate clusters.
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && std::abs(out.eigenvalues(stop - 1) - out.eigenvalues(stop)) <= Real(cluster_tol)) ++stop;
    for (Eigen::Index i = start; i < stop; ++i) {
      for (Eigen::Index j = start; j < i; ++j) {
        const Complex proj = out.eigenvectors.col(j).dot(out.eigenvectors.col(i));
        out.eigenvectors.col(i) -= proj * out.eigenvectors.col(j);
      }
      out.eigenvectors.col(i).normalize();
    }
    start = stop;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    auto col = out.eigenvectors.col(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Real mod = std::abs(col(k));
      if (mod > Real(1e-8)) {
        col *= std::conj(col(k)) / mod;
        col(k) = Complex(col(k).real(), Real(0));
        break;
      }
    }
  }
  return out;
}

/// Σ λᵢ|i⟩⟨i|.
template <typename Real>
HermitianMatrixT<Real> reconstruct(const EigenSystemT<Real>& es) {
  return es.eigenvectors * es.eigenvalues.template cast<std::complex<Real>>().asDiagonal() * es.eigenvectors.adjoint();
}

double min_eigenvalue(const HermitianMatrix& h);

/// True iff every eigenvalue of ρ(θ) is ≥ −tol.
bool is_feasible(const AffineFamily& family, const Vector& theta, double tol = kFeasibilityTol);

}  // namespace mmtherm

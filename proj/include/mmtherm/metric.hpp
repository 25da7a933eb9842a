// SPDX-License-Identifier: Apache-2.0
//
// Minimal (Bures) and maximal (left logarithmic derivative) monotone metric
// tensors on affine density families.
//
// Convention: ds² = Σ_kl G_kl dθ_k dθ_l, so an off-diagonal coefficient
// written as "g dθ_k dθ_l" in a line element equals 2·G_kl.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mmtherm/matrixcore.hpp"

namespace mmtherm {

enum class MetricKind { Minimal, Maximal };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

template <typename Real>
using MetricTensorT = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using MetricTensor = MetricTensorT<double>;

/// Eigenvalue sums at or below this are treated as lying on the null space.
inline constexpr double kEigenCutoff = 1e-12;
/// Dropped Bures terms must have numerators below this.
inline constexpr double kDroppedNumeratorTol = 1e-10;

/// Directions rotated into the eigenbasis: Bₖ ↦ V†BₖV.
template <typename Real>
std::vector<HermitianMatrixT<Real>> rotate_directions(const EigenSystemT<Real>& es,
                                                      const std::vector<HermitianMatrixT<Real>>& dirs) {
  std::vector<HermitianMatrixT<Real>> out;
  out.reserve(dirs.size());
  for (const auto& b : dirs) out.push_back(es.eigenvectors.adjoint() * b * es.eigenvectors);
  return out;
}

/// G_kl = Σ_ij ½ Re[bₖ_ij bₗ_ji] / (λᵢ+λⱼ) with bₖ in the eigenbasis.
/// `cutoff` below kEigenCutoff is for evaluation just inside the boundary.
template <typename Real>
MetricTensorT<Real> bures_kernel(const RealVectorT<Real>& lambda, const std::vector<HermitianMatrixT<Real>>& b,
                                 Real cutoff = Real(kEigenCutoff)) {
  const auto p = static_cast<Eigen::Index>(b.size());
  const Eigen::Index n = lambda.size();
  MetricTensorT<Real> g = MetricTensorT<Real>::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Real denom = lambda(i) + lambda(j);
      if (denom <= cutoff) {
        for (Eigen::Index k = 0; k < p; ++k) {
          if (std::norm(b[static_cast<std::size_t>(k)](i, j)) >= Real(kDroppedNumeratorTol))
            throw InfeasibleError("bures_tensor: direction leaves the support of rho (nonzero numerator on a null pair)");
        }
        continue;
      }
      for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index l = k; l < p; ++l) {
          const Real num =
              (b[static_cast<std::size_t>(k)](i, j) * b[static_cast<std::size_t>(l)](j, i)).real();
          g(k, l) += Real(0.5) * num / denom;
        }
      }
    }
  }
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < k; ++l) g(k, l) = g(l, k);
  return g;
}

/// G_kl = ¼ Σ_ij Re[bₖ_ij bₗ_ji] (λᵢ+λⱼ)/(2λᵢλⱼ).
template <typename Real>
MetricTensorT<Real> maximal_kernel(const RealVectorT<Real>& lambda, const std::vector<HermitianMatrixT<Real>>& b,
                                   Real cutoff = Real(kEigenCutoff)) {
  const auto p = static_cast<Eigen::Index>(b.size());
  const Eigen::Index n = lambda.size();
  if (lambda.minCoeff() <= cutoff)
    throw InfeasibleError("maximal_tensor: rho is singular; the maximal kernel diverges on the boundary");
  MetricTensorT<Real> g = MetricTensorT<Real>::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Real w = (lambda(i) + lambda(j)) / (Real(2) * lambda(i) * lambda(j));
      for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index l = k; l < p; ++l) {
          const Real num =
              (b[static_cast<std::size_t>(k)](i, j) * b[static_cast<std::size_t>(l)](j, i)).real();
          g(k, l) += Real(0.25) * num * w;
        }
      }
    }
  }
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < k; ++l) g(k, l) = g(l, k);
  return g;
}

MetricTensor bures_tensor(const AffineFamily& family, const Vector& theta);

/// Also evaluates ¼ Re tr(Bₖ ρ⁻¹ Bₗ) and throws if the two forms disagree.
MetricTensor maximal_tensor(const AffineFamily& family, const Vector& theta);

MetricTensor metric_tensor(MetricKind kind, const AffineFamily& family, const Vector& theta);

/// √det G. Throws InfeasibleError when det G < −1e-12.
double volume_element(const MetricTensor& g);

/// Bures tensor from symmetric logarithmic derivatives: solves the n² real equations
/// Bₖ = (Lₖρ + ρLₖ)/2, then G_kl = ¼ Re tr(Bₖ Lₗ). Limited to n ≤ 8.
MetricTensor sld_cross_check(const AffineFamily& family, const Vector& theta);

/// Metric evaluation tuned for repeated calls on one family.
///
/// When the base and every direction commute, a joint eigenbasis is computed
/// once and the tensor reduces to the classical Fisher information of the
/// eigenvalue distribution divided by four, which is the same for both
/// kinds. Otherwise each call runs the general eigenbasis kernel, without the
/// inverse-matrix cross-check that maximal_tensor() performs.
class MetricEvaluator {
 public:
  /// `fast_path = false` forces the general kernel even for commuting families.
  MetricEvaluator(AffineFamily family, MetricKind kind, bool fast_path = true);

  MetricTensor tensor(const Vector& theta) const;
  double volume(const Vector& theta) const { return volume_element(tensor(theta)); }

  /// Volume element for quadrature nodes. Inside the eigenvalue cutoff, where
  /// tensor() refuses, the computed eigenvalues are used as they are, and a
  /// node that rounds onto the boundary itself contributes 0. Such nodes carry
  /// negligible quadrature weight. Points outside the region still throw.
  double quadrature_volume(const Vector& theta) const;

  bool commuting() const { return joint_.has_value(); }
  MetricKind kind() const { return kind_; }
  const AffineFamily& family() const { return family_; }

 private:
  struct JointBasis {
    Vector base;   // eigenvalues of B₀ in the joint basis
    Matrix slope;  // slope(k, i): eigenvalue i of Bₖ
  };

  MetricTensor general_tensor(const EigenSystem& es, double cutoff) const;

  AffineFamily family_;
  MetricKind kind_;
  std::vector<HermitianMatrix> dirs_;
  std::optional<JointBasis> joint_;
};

}  // namespace mmtherm

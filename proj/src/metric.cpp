// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/metric.hpp"

namespace mmtherm {

namespace {

using Complex = std::complex<double>;

std::vector<HermitianMatrix> directions(const AffineFamily& family) {
  std::vector<HermitianMatrix> out;
  for (const auto& p : family.parameters()) out.push_back(p.direction);
  return out;
}

EigenSystem checked_eigensystem(const AffineFamily& family, const Vector& theta) {
  auto es = eigensystem(family(theta));
  if (es.eigenvalues.minCoeff() < -kFeasibilityTol)
    throw InfeasibleError("metric: parameter point is outside the feasible region (min eigenvalue " +
                          std::to_string(es.eigenvalues.minCoeff()) + ")");
  return es;
}

}  // namespace

std::string_view to_string(MetricKind kind) { return kind == MetricKind::Minimal ? "minimal" : "maximal"; }

MetricKind parse_metric_kind(std::string_view text) {
  if (text == "minimal" || text == "min" || text == "bures") return MetricKind::Minimal;
  if (text == "maximal" || text == "max" || text == "lld") return MetricKind::Maximal;
  throw DomainError("unknown metric kind '" + std::string(text) + "' (expected minimal|maximal)");
}

MetricTensor bures_tensor(const AffineFamily& family, const Vector& theta) {
  const auto es = checked_eigensystem(family, theta);
  return bures_kernel<double>(es.eigenvalues, rotate_directions(es, directions(family)));
}

MetricTensor maximal_tensor(const AffineFamily& family, const Vector& theta) {
  const HermitianMatrix rho = family(theta);
  const auto es = checked_eigensystem(family, theta);
  const auto dirs = directions(family);
  MetricTensor g = maximal_kernel<double>(es.eigenvalues, rotate_directions(es, dirs));

  // Independent route: ¼ Re tr(Bₖ ρ⁻¹ Bₗ) with ρ⁻¹ from a pivoted LDLᵀ solve.
  const Eigen::LDLT<HermitianMatrix> ldlt(rho);
  const auto p = family.param_count();
  MetricTensor g_inv(p, p);
  std::vector<HermitianMatrix> rinv_b;
  for (const auto& b : dirs) rinv_b.push_back(ldlt.solve(b));
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < p; ++l)
      g_inv(k, l) = 0.25 * (dirs[static_cast<std::size_t>(k)] * rinv_b[static_cast<std::size_t>(l)]).trace().real();

  const double cond = es.eigenvalues.maxCoeff() / es.eigenvalues.minCoeff();
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = 1e-12 * std::max(1.0, cond) * static_cast<double>(rho.rows()) * scale + 1e-14;
  if ((g - g_inv).cwiseAbs().maxCoeff() > std::max(tol, 1e-9 * scale))
    throw Error("maximal_tensor: kernel and inverse forms disagree by " +
                std::to_string((g - g_inv).cwiseAbs().maxCoeff()));
  return g;
}

MetricTensor metric_tensor(MetricKind kind, const AffineFamily& family, const Vector& theta) {
  return kind == MetricKind::Minimal ? bures_tensor(family, theta) : maximal_tensor(family, theta);
}

double volume_element(const MetricTensor& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw DomainError("volume_element: metric must be square and nonempty");
  const double det = g.rows() == 1 ? g(0, 0) : g.determinant();
  if (det < -1e-12) throw InfeasibleError("volume_element: negative determinant " + std::to_string(det));
  return std::sqrt(std::max(det, 0.0));
}

MetricTensor sld_cross_check(const AffineFamily& family, const Vector& theta) {
  const Eigen::Index n = family.dim();
  if (n > 8) throw DomainError("sld_cross_check: limited to dimension 8");
  const HermitianMatrix rho = family(theta);
  const auto es = checked_eigensystem(family, theta);
  if (es.eigenvalues.minCoeff() <= kEigenCutoff) throw InfeasibleError("sld_cross_check: rho is singular");

  // Real coordinates of a Hermitian matrix: diagonal entries, then (Re, Im) of each upper entry.
  const Eigen::Index m = n * n;
  auto basis = [&](Eigen::Index idx) {
    HermitianMatrix e = HermitianMatrix::Zero(n, n);
    if (idx < n) {
      e(idx, idx) = 1.0;
      return e;
    }
    Eigen::Index r = idx - n;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (r == 0) {
          e(i, j) = e(j, i) = 1.0;
          return e;
        }
        if (r == 1) {
          e(i, j) = Complex(0, 1);
          e(j, i) = Complex(0, -1);
          return e;
        }
        r -= 2;
      }
    }
    return e;
  };
  auto coords = [&](const HermitianMatrix& h) {
    Vector c(m);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n; ++i) c(idx++) = h(i, i).real();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        c(idx++) = h(i, j).real();
        c(idx++) = h(i, j).imag();
      }
    }
    return c;
  };

  Matrix system(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const HermitianMatrix e = basis(c);
    system.col(c) = coords(0.5 * (e * rho + rho * e));
  }
  const Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw InfeasibleError("sld_cross_check: singular Lyapunov system");

  const auto dirs = directions(family);
  std::vector<HermitianMatrix> sld;
  for (const auto& b : dirs) {
    const Vector x = lu.solve(coords(b));
    HermitianMatrix l = HermitianMatrix::Zero(n, n);
    for (Eigen::Index c = 0; c < m; ++c) l += x(c) * basis(c);
    sld.push_back(std::move(l));
  }
  const auto p = family.param_count();
  MetricTensor g(p, p);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < p; ++l)
      g(k, l) = 0.25 * (dirs[static_cast<std::size_t>(k)] * sld[static_cast<std::size_t>(l)]).trace().real();
  return g;
}

MetricEvaluator::MetricEvaluator(AffineFamily family, MetricKind kind, bool fast_path)
    : family_(std::move(family)), kind_(kind), dirs_(directions(family_)) {
  if (!fast_path) return;
  const auto& dirs = dirs_;
  bool commuting = true;
  auto commutes = [](const HermitianMatrix& a, const HermitianMatrix& b) {
    return (a * b - b * a).cwiseAbs().maxCoeff() <= 1e-13;
  };
  for (std::size_t k = 0; k < dirs.size() && commuting; ++k) {
    commuting = commutes(family_.base(), dirs[k]);
    for (std::size_t l = k + 1; l < dirs.size() && commuting; ++l) commuting = commutes(dirs[k], dirs[l]);
  }
  if (!commuting) return;

  // A generic combination separates every joint eigenspace that any direction resolves.
  HermitianMatrix probe = family_.base() * 0.7548776662466927;
  double w = 0.5698402909980532;
  for (const auto& b : dirs) {
    probe += w * b;
    w = std::fmod(w * 1.6180339887498949 + 0.3247179572447460, 1.0) + 0.25;
  }
  const auto es = eigensystem(probe);
  const auto n = family_.dim();
  JointBasis jb;
  jb.base.resize(n);
  jb.slope.resize(family_.param_count(), n);
  auto diagonal = [&](const HermitianMatrix& m, Vector& out) {
    const HermitianMatrix d = es.eigenvectors.adjoint() * m * es.eigenvectors;
    const HermitianMatrix off = d - HermitianMatrix(d.diagonal().asDiagonal());
    out = d.diagonal().real();
    return off.cwiseAbs().maxCoeff() <= 1e-12;
  };
  Vector tmp;
  if (!diagonal(family_.base(), tmp)) return;
  jb.base = tmp;
  for (Eigen::Index k = 0; k < family_.param_count(); ++k) {
    if (!diagonal(dirs[static_cast<std::size_t>(k)], tmp)) return;
    jb.slope.row(k) = tmp.transpose();
  }
  joint_ = std::move(jb);
}

MetricTensor MetricEvaluator::general_tensor(const EigenSystem& es, double cutoff) const {
  const auto b = rotate_directions(es, dirs_);
  return kind_ == MetricKind::Minimal ? bures_kernel<double>(es.eigenvalues, b, cutoff)
                                      : maximal_kernel<double>(es.eigenvalues, b, cutoff);
}

MetricTensor MetricEvaluator::tensor(const Vector& theta) const {
  if (!joint_) return general_tensor(checked_eigensystem(family_, theta), kEigenCutoff);
  if (theta.size() != family_.param_count()) throw DomainError("MetricEvaluator: parameter length mismatch");
  const Vector lambda = joint_->base + joint_->slope.transpose() * theta;
  if (lambda.minCoeff() < -kFeasibilityTol) throw InfeasibleError("metric: parameter point is outside the feasible region");
  if (kind_ == MetricKind::Maximal && lambda.minCoeff() <= kEigenCutoff)
    throw InfeasibleError("maximal_tensor: rho is singular; the maximal kernel diverges on the boundary");
  const auto p = family_.param_count();
  MetricTensor g = MetricTensor::Zero(p, p);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (2 * lambda(i) <= kEigenCutoff) {
      if (joint_->slope.col(i).squaredNorm() >= kDroppedNumeratorTol)
        throw InfeasibleError("bures_tensor: direction leaves the support of rho (nonzero numerator on a null pair)");
      continue;
    }
    g += joint_->slope.col(i) * joint_->slope.col(i).transpose() / (4 * lambda(i));
  }
  return g;
}

double MetricEvaluator::quadrature_volume(const Vector& theta) const {
  try {
    return volume(theta);
  } catch (const InfeasibleError&) {
    // Fall through to the unguarded kernels below.
  }
  constexpr double kTiny = 1e-300;
  if (joint_) {
    const Vector lambda = joint_->base + joint_->slope.transpose() * theta;
    if (lambda.minCoeff() < -kFeasibilityTol) throw InfeasibleError("metric: parameter point is outside the feasible region");
    const auto p = family_.param_count();
    MetricTensor g = MetricTensor::Zero(p, p);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) <= kTiny) {
        if (joint_->slope.col(i).squaredNorm() >= kDroppedNumeratorTol) return 0.0;
        continue;
      }
      g += joint_->slope.col(i) * joint_->slope.col(i).transpose() / (4 * lambda(i));
    }
    return volume_element(g);
  }
  const auto es = checked_eigensystem(family_, theta);
  try {
    return volume_element(general_tensor(es, kTiny));
  } catch (const InfeasibleError&) {
    // The node rounded onto the boundary itself, where the singular volume
    // element has no value; its quadrature weight is at rounding level.
    return 0.0;
  }
}

}  // namespace mmtherm

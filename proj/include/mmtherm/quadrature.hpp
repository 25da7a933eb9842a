// SPDX-License-Identifier: Apache-2.0
//
// Double-exponential (tanh-sinh) quadrature for integrands with power-law
// endpoint singularities, plus Gauss-Legendre nodes for tabulation grids.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mmtherm {

struct QuadratureOptions {
  double tol = 1e-10;  // relative to Σ w|f|
  double abs_tol = 0.0;
  int min_level = 3;
  int max_level = 12;

  // Nodes closer than max(guard_rel·(b−a), guard_abs) to an endpoint are never
  // evaluated; their values come from a power-law model fitted at the guard.
  double guard_rel = 1e-10;
  double guard_abs = 2e-11;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // |I_k − I_{k−1}| at the accepted level
  double l1 = 0.0;     // Σ w|f| at the accepted level
  int level = 0;
  std::size_t evaluations = 0;
  double left_exponent = 0.0;   // fitted s in f ~ d^(−s) near a
  double right_exponent = 0.0;  // near b
};

/// ∫_a^b f. Throws DivergenceError when an endpoint exponent is ≥ 1 and
/// QuadratureError on non-convergence or a NaN integrand value.
QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

struct GaussLegendre {
  std::vector<double> nodes;    // ascending in (−1, 1)
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(std::size_t n);

/// Pairwise (cascade) summation.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace mmtherm

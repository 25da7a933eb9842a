// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mmtherm/errors.hpp"

namespace mmtherm {

namespace {

constexpr double kBesselArgMax = 700.0;
constexpr double kErfiArgMax = 26.0;

void check_bessel_args(Order nu, double x) {
  if (nu.twice < -1) throw DomainError("bessel_i: orders below -1/2 are not implemented");
  if (!(x >= 0.0)) throw DomainError("bessel_i: argument must be nonnegative");
  if (x > kBesselArgMax) throw DomainError("bessel_i: argument " + std::to_string(x) + " overflows (limit 700)");
}

}  // namespace

double bessel_i_series(Order nu, double x) {
  check_bessel_args(nu, x);
  const double v = nu.value();
  if (x == 0.0) return nu.twice == 0 ? 1.0 : (nu.twice < 0 ? std::numeric_limits<double>::infinity() : 0.0);
  const double q = 0.25 * x * x;
  double term = std::pow(0.5 * x, v) / std::tgamma(v + 1.0);
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + v));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double bessel_i_asymptotic(int n, double x) {
  check_bessel_args(Order::integer(n), x);
  if (x <= 0.0) throw DomainError("bessel_i_asymptotic: argument must be positive");
  // e^x/√(2πx) Σ (−1)^k a_k(ν)/x^k, truncated at the smallest term.
  const double mu = 4.0 * n * n;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * sum;
}

double bessel_i_half_closed(Order nu, double x) {
  check_bessel_args(nu, x);
  if (nu.is_integer()) throw DomainError("bessel_i_half_closed: order must be a half-integer");
  if (x == 0.0) return nu.twice < 0 ? std::numeric_limits<double>::infinity() : 0.0;
  const double pre = std::sqrt(2.0 / (std::numbers::pi * x));
  const double sh = std::sinh(x), ch = std::cosh(x);
  if (nu.twice == -1) return pre * ch;
  double prev = pre * ch;  // I_{-1/2}
  double cur = pre * sh;   // I_{1/2}
  // I_{ν+1} = I_{ν−1} − (2ν/x) I_ν, stable for ν below x.
  for (int twice = 1; twice < nu.twice; twice += 2) {
    const double next = prev - (twice / x) * cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

double bessel_i(Order nu, double x) {
  check_bessel_args(nu, x);
  if (nu.is_integer()) {
    const int n = nu.twice / 2;
    if (x <= kBesselSeriesLimit) return bessel_i_series(nu, x);
    return bessel_i_asymptotic(n, x);
  }
  // Half-integer orders: hyperbolic closed forms with upward recurrence where
  // that is well conditioned, otherwise the power series.
  if (x >= 2.0 && nu.value() <= x) return bessel_i_half_closed(nu, x);
  if (x <= kBesselSeriesLimit) return bessel_i_series(nu, x);
  return bessel_i_half_closed(nu, x);
}

double bessel_i(int n, double x) { return bessel_i(Order::integer(n), x); }

double erfi_series(double x) {
  const double x2 = x * x;
  double term = x, sum = x;
  for (int n = 1; n < 400; ++n) {
    term *= x2 / n;
    const double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

double dawson(double x) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.0;
  // F(x) = x/(1 + 2x²/(3 − 4x²/(5 + 6x²/(7 − …)))), evaluated from the tail.
  const int depth = 64 + static_cast<int>(3.0 * ax * ax);
  const double x2 = ax * ax;
  double t = 0.0;
  for (int k = depth; k >= 2; --k) {
    const double a = ((k % 2 == 0) ? 1.0 : -1.0) * 2.0 * (k - 1) * x2;
    t = a / ((2.0 * k - 1.0) + t);
  }
  const double f = ax / (1.0 + t);
  return x < 0 ? -f : f;
}

double dawson_rybicki(double x) {
  constexpr double h = 0.2;
  constexpr int terms = 18;
  const double ax = std::abs(x);
  if (ax < 1e-3) {
    const double x2 = x * x;
    return x * (1.0 - (2.0 / 3.0) * x2 * (1.0 - 0.4 * x2 * (1.0 - (2.0 / 7.0) * x2)));
  }
  const double n0 = 2.0 * std::round(0.5 * ax / h);
  const double xp = ax - n0 * h;
  double e1 = std::exp(2.0 * xp * h);
  const double e2 = e1 * e1;
  double d1 = n0 + 1.0, d2 = d1 - 2.0;
  double sum = 0.0;
  for (int i = 0; i < terms; ++i) {
    const double c = std::exp(-std::pow((2.0 * i + 1.0) * h, 2));
    sum += c * (e1 / d1 + 1.0 / (d2 * e1));
    d1 += 2.0;
    d2 -= 2.0;
    e1 *= e2;
  }
  const double f = std::exp(-xp * xp) * sum / std::sqrt(std::numbers::pi);
  return x < 0 ? -f : f;
}

double erfi_dawson(double x) {
  if (std::abs(x) > kErfiArgMax) throw DomainError("erfi: |x| above 26 overflows");
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(x * x) * dawson(x);
}

double erfi(double x) {
  if (!std::isfinite(x) || std::abs(x) > kErfiArgMax) throw DomainError("erfi: |x| above 26 overflows");
  if (std::abs(x) <= kErfiSeriesLimit) return erfi_series(x);
  return erfi_dawson(x);
}

namespace {

struct Agm {
  double k;
  double cross_sum;  // Σ 2^(n−1) c_n²
};

Agm agm_elliptic(double m) {
  double a = 1.0, b = std::sqrt(1.0 - m);
  double c2 = m;  // c_0² = m
  double pow2 = 0.5;
  double cross = pow2 * c2;
  for (int i = 0; i < 64; ++i) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    const double cn = 0.5 * (a - b);
    pow2 *= 2.0;
    cross += pow2 * cn * cn;
    a = an;
    b = bn;
    // Convergence is quadratic, so later terms are below rounding. Iterating
    // on would let the stalled a − b be amplified by 2^n.
    if (std::abs(cn) <= 1e-15 * a) break;
  }
  return {0.5 * std::numbers::pi / a, cross};
}

}  // namespace

double ellip_k(double m) {
  if (!(m >= 0.0 && m < 1.0)) throw DomainError("ellip_k: parameter m must satisfy 0 <= m < 1");
  return agm_elliptic(m).k;
}

double ellip_e(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw DomainError("ellip_e: parameter m must satisfy 0 <= m <= 1");
  if (m == 1.0) return 1.0;
  const auto r = agm_elliptic(m);
  return r.k * (1.0 - r.cross_sum);
}

double langevin(double x) {
  const double ax = std::abs(x);
  if (ax < 0.05) {
    // x/3 − x³/45 + 2x⁵/945 − x⁷/4725 + 2x⁹/93555
    const double x2 = x * x;
    return x * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * (2.0 / 93555.0)))));
  }
  return 1.0 / std::tanh(x) - 1.0 / x;
}

double brillouin_half(double x) { return std::tanh(x); }

}  // namespace mmtherm

// SPDX-License-Identifier: Apache-2.0
//
// Special functions for the closed-form partition functions.
#pragma once

namespace mmtherm {

/// Bessel order stored as twice its value, so half-integers are exact.
struct Order {
  int twice = 0;

  static constexpr Order integer(int n) { return {2 * n}; }
  static constexpr Order half(int odd_numerator) { return {odd_numerator}; }  // ν = odd_numerator/2

  constexpr double value() const { return 0.5 * twice; }
  constexpr bool is_integer() const { return twice % 2 == 0; }
  constexpr bool operator==(const Order&) const = default;
};

/// Modified Bessel function of the first kind, 0 ≤ x ≤ 700, ν ≥ −1/2.
double bessel_i(Order nu, double x);
double bessel_i(int n, double x);

// Individual branches, exposed so they can be cross-validated.
double bessel_i_series(Order nu, double x);
double bessel_i_asymptotic(int n, double x);
double bessel_i_half_closed(Order nu, double x);

inline constexpr double kBesselSeriesLimit = 15.0;
inline constexpr double kErfiSeriesLimit = 3.0;

/// erfi(x) = −i·erf(ix), |x| ≤ 26.
double erfi(double x);
double erfi_series(double x);
double erfi_dawson(double x);

/// Dawson's integral F(x) = e^{−x²}∫₀ˣ e^{t²}dt by its continued fraction.
double dawson(double x);
/// Same function by Rybicki's exponentially convergent sampling sum.
double dawson_rybicki(double x);

/// Complete elliptic integrals in the parameter convention: K(m) = ∫₀^{π/2} (1 − m sin²θ)^{−1/2} dθ.
double ellip_k(double m);
double ellip_e(double m);

/// coth(x) − 1/x.
double langevin(double x);
/// Spin-1/2 Brillouin function, tanh(x).
double brillouin_half(double x);

}  // namespace mmtherm

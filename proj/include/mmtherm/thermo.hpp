// SPDX-License-Identifier: Apache-2.0
//
// Boltzmann-weighted moments of a prior: partition function, mean energy and
// energy variance, plus the closed-form partition functions they are checked
// against.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmtherm/measure.hpp"

namespace mmtherm {

/// ε(θ) = h·(c·θ).
struct EnergyObservable {
  Vector c;
  double h = 1.0;

  double operator()(const Vector& theta) const { return h * c.dot(theta); }
  /// Index of the only nonzero coefficient, or −1.
  int single_axis() const;
};

struct ThermoPoint {
  double beta = 0.0;
  double q = 1.0;
  double e = 0.0;
  double var = 0.0;
};

/// βh above which e^{−βε} is considered to overflow.
inline constexpr double kMaxBetaH = 700.0;

double partition(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts = {});
double energy_mean(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts = {});
double energy_variance(const Prior& prior, const EnergyObservable& obs, double beta,
                       const IntegrationOptions& opts = {});

/// Q, E and Var in one go. E and Var are Boltzmann-tilted moment ratios.
ThermoPoint thermo_point(const Prior& prior, const EnergyObservable& obs, double beta,
                         const IntegrationOptions& opts = {});

/// Closed forms in the dimensionless x = βh: Q(x) normalized to Q(0) = 1 and E(x)/h.
struct ClosedForm {
  std::function<double(double)> q;
  std::function<double(double)> e;
  std::string formula;
};

std::optional<ClosedForm> closed_form(const std::string& scenario_id);
double closed_form_q(const std::string& scenario_id, double beta_h);
double closed_form_energy(const std::string& scenario_id, double beta_h);
/// Bivariate product form for the square scenario: I₀(β_ξh/2)·I₀(β_ζh/2).
double closed_form_q_bivariate(double beta_xi_h, double beta_zeta_h);

struct ThermoRow {
  double beta = 0.0;
  double q_num = 0.0, q_closed = 0.0;
  double e_num = 0.0, e_closed = 0.0;
  double var_num = 0.0;
  double residual_q = 0.0, residual_e = 0.0;
};

struct ThermoCurve {
  std::string scenario;
  double h = 1.0;
  bool has_closed = false;
  std::vector<ThermoRow> rows;

  /// Columns beta,Q_num,Q_closed,E_num,E_closed,Var_num,residual_Q,residual_E; missing closed forms are empty.
  std::string to_csv() const;
  std::string to_json() const;
};

/// Worker count for data-parallel loops: MMTHERM_THREADS if set, else hardware concurrency.
unsigned worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

ThermoCurve thermo_curve(const Prior& prior, const EnergyObservable& obs, const std::vector<double>& betas,
                         const ClosedForm* closed = nullptr, const IntegrationOptions& opts = {});

struct BivariateRow {
  double beta_xi = 0.0, beta_zeta = 0.0;
  double q_num = 0.0, q_closed = 0.0, residual_q = 0.0;
};

/// Q(β_ξ, β_ζ) for ε = h(β_ξ θ₀ + β_ζ θ₁)/β on a two-parameter prior.
std::vector<BivariateRow> bivariate_partition(const Prior& prior, double h, const std::vector<double>& beta_xi,
                                              const std::vector<double>& beta_zeta,
                                              const IntegrationOptions& opts = {});

/// Parse "start:stop:step" (inclusive of stop within half a step).
std::vector<double> parse_beta_grid(const std::string& spec);

}  // namespace mmtherm

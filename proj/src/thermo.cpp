// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/thermo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mmtherm/errors.hpp"
#include "mmtherm/specfun.hpp"

namespace mmtherm {

int EnergyObservable::single_axis() const {
  int axis = -1;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) == 0.0) continue;
    if (axis >= 0) return -1;
    axis = static_cast<int>(i);
  }
  return axis;
}

namespace {

struct Reduced {
  Prior prior;
  EnergyObservable obs;
};

// Energies that read a single coordinate only need that coordinate's marginal.
Reduced reduce(const Prior& prior, const EnergyObservable& obs, const IntegrationOptions& opts) {
  if (obs.c.size() != prior.dim()) throw DomainError("energy observable dimension does not match the prior");
  const int axis = obs.single_axis();
  if (prior.dim() == 1 || axis < 0) {
    if (std::holds_alternative<Ball>(prior.region()) && prior.dim() > 1)
      throw DomainError("ball priors take energies along a single axis");
    return {prior, obs};
  }
  EnergyObservable one{Vector::Constant(1, obs.c(axis)), obs.h};
  return {axis_marginal_prior(prior, axis, opts), one};
}

void check_beta(const Prior& prior, const EnergyObservable& obs, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and nonnegative");
  const Box box = bounding_box(prior.region());
  double reach = 0.0;
  for (std::size_t k = 0; k < box.sides.size(); ++k) {
    const auto& s = box.sides[k];
    reach += std::abs(obs.c(static_cast<Eigen::Index>(k))) * std::max(std::abs(s.a), std::abs(s.b));
  }
  if (beta * std::abs(obs.h) * reach > kMaxBetaH)
    throw DomainError("beta*h too large: Boltzmann factor overflows (limit " + std::to_string(kMaxBetaH) + ")");
}

ThermoPoint point_reduced(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts) {
  ThermoPoint p;
  p.beta = beta;
  p.q = expectation(prior, [&](const Vector& t) { return std::exp(-beta * obs(t)); }, opts);
  if (!(p.q > 0.0) || !std::isfinite(p.q)) throw QuadratureError("partition function is not positive and finite", p.q, 0);
  p.e = expectation(prior, [&](const Vector& t) {
          const double e = obs(t);
          return e * std::exp(-beta * e);
        }, opts) / p.q;
  p.var = expectation(prior, [&](const Vector& t) {
            const double e = obs(t);
            return (e - p.e) * (e - p.e) * std::exp(-beta * e);
          }, opts) / p.q;
  return p;
}

}  // namespace

ThermoPoint thermo_point(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts) {
  check_beta(prior, obs, beta);
  const auto r = reduce(prior, obs, opts);
  return point_reduced(r.prior, r.obs, beta, opts);
}

double partition(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts) {
  check_beta(prior, obs, beta);
  const auto r = reduce(prior, obs, opts);
  return expectation(r.prior, [&](const Vector& t) { return std::exp(-beta * r.obs(t)); }, opts);
}

double energy_mean(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts) {
  return thermo_point(prior, obs, beta, opts).e;
}

double energy_variance(const Prior& prior, const EnergyObservable& obs, double beta, const IntegrationOptions& opts) {
  return thermo_point(prior, obs, beta, opts).var;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

double ratio_i(Order num, Order den, double x) { return bessel_i(num, x) / bessel_i(den, x); }

// Q = I₀(a x)·e^{b x}, E/h = −b − a I₁/I₀(a x).
ClosedForm bessel0_form(double a, double b, std::string formula) {
  return {[a, b](double x) { return std::exp(b * x) * bessel_i(0, a * x); },
          [a, b](double x) { return x == 0.0 ? -b : -b - a * bessel_i(1, a * x) / bessel_i(0, a * x); },
          std::move(formula)};
}

double s21_q(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sqrt(2.0 * x);
  return std::exp(x) * dawson(s) / s;
}

double s21_e(double x) {
  if (x < 1e-4) return 1.0 / 3.0 - 16.0 * x / 45.0 - 64.0 * x * x / 945.0;
  const double s = std::sqrt(2.0 * x);
  return 1.0 + 1.0 / (2.0 * x) - 1.0 / (s * dawson(s));
}

// Prior 3v/(4√(1−v)) on [0, 1]: moments M_n = (3/4)B(n+2, 1/2), M_{n+1}/M_n = (n+2)/(n+5/2).
std::pair<double, double> s3_series(double x) {
  double m = 1.0, term = 1.0, q = 0.0, first = 0.0;
  for (int n = 0; n < 200; ++n) {
    const double m_next = m * (n + 2.0) / (n + 2.5);
    q += term * m;
    first += term * m_next;
    if (std::abs(term * m) < 1e-18 * std::abs(q) && n > 3) break;
    term *= -x / (n + 1.0);
    m = m_next;
  }
  return {q, first / q};
}

double s3_q(double x) {
  if (x < 0.5) return s3_series(x).first;
  const double s = std::sqrt(x), f = dawson(s);
  return 3.0 * ((1.0 + 2.0 * x) * f - s) / (4.0 * s * s * s);
}

double s3_e(double x) {
  if (x < 0.5) return s3_series(x).second;
  const double s = std::sqrt(x), f = dawson(s);
  const double g = (1.0 + 2.0 * x) * f - s;
  return 3.0 / (2.0 * x) - (f + s - 2.0 * x * f) / g;
}

}  // namespace

std::optional<ClosedForm> closed_form(const std::string& id) {
  if (id == "single-min" || id == "bloch-min")
    return ClosedForm{[](double x) { return x == 0.0 ? 1.0 : 2.0 * bessel_i(1, x) / x; },
                      [](double x) { return x == 0.0 ? 0.0 : -bessel_i(2, x) / bessel_i(1, x); },
                      "Q = 2 I1(bh)/(bh), E/h = -I2/I1"};
  if (id == "bloch-max" || id == "s22")
    return ClosedForm{[](double x) { return x == 0.0 ? 1.0 : std::sinh(x) / x; },
                      [](double x) { return -langevin(x); }, "Q = sinh(bh)/(bh), E/h = 1/(bh) - coth(bh)"};
  if (id == "quat-min")
    return ClosedForm{[](double x) { return x == 0.0 ? 1.0 : 8.0 * bessel_i(2, x) / (x * x); },
                      [](double x) { return x == 0.0 ? 0.0 : -bessel_i(3, x) / bessel_i(2, x); },
                      "Q = 8 I2(bh)/(bh)^2, E/h = -I3/I2"};
  if (id == "quat-max")
    return ClosedForm{
        [](double x) {
          return x == 0.0 ? 1.0 : 3.0 * std::sqrt(0.5 * std::numbers::pi) * bessel_i(Order::half(3), x) / std::pow(x, 1.5);
        },
        [](double x) { return x == 0.0 ? 0.0 : -ratio_i(Order::half(5), Order::half(3), x); },
        "Q = 3 sqrt(pi/2) I_{3/2}(bh)/(bh)^{3/2}, E/h = -I_{5/2}/I_{3/2}"};
  if (id == "s21")
    return ClosedForm{s21_q, s21_e, "Q = e^{-bh} sqrt(pi) erfi(sqrt(2bh))/(2 sqrt(2bh))"};
  if (id == "s23" || id == "s23a" || id == "s23b") return bessel0_form(0.5, 0.0, "Q = I0(bh/2)");
  if (id == "s24" || id == "s25-6") return bessel0_form(2.0 / 3.0, 1.0 / 3.0, "Q = e^{bh/3} I0(2bh/3)");
  if (id == "s25-4") return bessel0_form(2.0 / 3.0, -1.0 / 3.0, "Q = e^{-bh/3} I0(2bh/3)");
  if (id == "s26-3") return bessel0_form(1.0 / 3.0, 0.0, "Q = I0(bh/3)");
  if (id == "s3")
    return ClosedForm{s3_q, s3_e, "Q = 3 e^{-bh}((1+2bh) sqrt(pi) erfi(sqrt(bh)) - 2 sqrt(bh) e^{bh})/(8 (bh)^{3/2})"};
  return std::nullopt;
}

double closed_form_q(const std::string& id, double beta_h) {
  const auto cf = closed_form(id);
  if (!cf) throw DomainError("no closed-form partition function for scenario '" + id + "'");
  return cf->q(beta_h);
}

double closed_form_energy(const std::string& id, double beta_h) {
  const auto cf = closed_form(id);
  if (!cf) throw DomainError("no closed-form partition function for scenario '" + id + "'");
  return cf->e(beta_h);
}

double closed_form_q_bivariate(double bx, double bz) { return bessel_i(0, 0.5 * bx) * bessel_i(0, 0.5 * bz); }

// ---------------------------------------------------------------------------

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MMTHERM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ThermoCurve thermo_curve(const Prior& prior, const EnergyObservable& obs, const std::vector<double>& betas,
                         const ClosedForm* closed, const IntegrationOptions& opts) {
  for (double b : betas) check_beta(prior, obs, b);
  const auto r = reduce(prior, obs, opts);
  ThermoCurve curve;
  curve.h = obs.h;
  curve.has_closed = closed != nullptr;
  curve.rows.resize(betas.size());
  parallel_for(betas.size(), [&](std::size_t i) {
    const auto p = point_reduced(r.prior, r.obs, betas[i], opts);
    ThermoRow row;
    row.beta = p.beta;
    row.q_num = p.q;
    row.e_num = p.e;
    row.var_num = p.var;
    if (closed) {
      const double x = betas[i] * obs.h;
      row.q_closed = closed->q(x);
      row.e_closed = obs.h * closed->e(x);
      row.residual_q = std::abs(row.q_num - row.q_closed);
      row.residual_e = std::abs(row.e_num - row.e_closed);
    } else {
      row.q_closed = row.e_closed = row.residual_q = row.residual_e = std::numeric_limits<double>::quiet_NaN();
    }
    curve.rows[i] = row;
  });
  return curve;
}

std::string ThermoCurve::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "beta,Q_num,Q_closed,E_num,E_closed,Var_num,residual_Q,residual_E\n";
  auto cell = [&](double v) {
    if (std::isfinite(v)) os << v;
  };
  for (const auto& r : rows) {
    os << r.beta << "," << r.q_num << ",";
    cell(r.q_closed);
    os << "," << r.e_num << ",";
    cell(r.e_closed);
    os << "," << r.var_num << ",";
    cell(r.residual_q);
    os << ",";
    cell(r.residual_e);
    os << "\n";
  }
  return os.str();
}

std::string ThermoCurve::to_json() const {
  using nlohmann::json;
  auto val = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows_json = json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"beta", r.beta},
                         {"Q_num", r.q_num},
                         {"Q_closed", val(r.q_closed)},
                         {"E_num", r.e_num},
                         {"E_closed", val(r.e_closed)},
                         {"Var_num", r.var_num},
                         {"residual_Q", val(r.residual_q)},
                         {"residual_E", val(r.residual_e)}});
  json j{{"scenario", scenario}, {"h", h}, {"has_closed_form", has_closed}, {"rows", rows_json}};
  return j.dump(2);
}

std::vector<BivariateRow> bivariate_partition(const Prior& prior, double h, const std::vector<double>& beta_xi,
                                              const std::vector<double>& beta_zeta, const IntegrationOptions& opts) {
  if (prior.dim() != 2) throw DomainError("bivariate_partition: prior must have two parameters");
  std::vector<BivariateRow> rows(beta_xi.size() * beta_zeta.size());
  parallel_for(rows.size(), [&](std::size_t idx) {
    const double bx = beta_xi[idx / beta_zeta.size()], bz = beta_zeta[idx % beta_zeta.size()];
    Vector c(2);
    c << bx, bz;
    const EnergyObservable obs{c, h};
    BivariateRow row;
    row.beta_xi = bx;
    row.beta_zeta = bz;
    row.q_num = expectation(prior, [&](const Vector& t) { return std::exp(-obs(t)); }, opts);
    row.q_closed = closed_form_q_bivariate(bx * h, bz * h);
    row.residual_q = std::abs(row.q_num - row.q_closed);
    rows[idx] = row;
  });
  return rows;
}

std::vector<double> parse_beta_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("beta grid: cannot parse '" + item + "' in '" + spec + "'");
    }
  }
  if (parts.size() == 1) {
    if (parts[0] < 0) throw DomainError("beta grid: beta must be nonnegative");
    return parts;
  }
  if (parts.size() != 3) throw DomainError("beta grid: expected start:stop:step, got '" + spec + "'");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (start < 0 || stop < start) throw DomainError("beta grid: need 0 <= start <= stop");
  if (!(step > 0)) throw DomainError("beta grid: step must be positive");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

}  // namespace mmtherm

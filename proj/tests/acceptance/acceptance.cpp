// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run. Every target below is either a printed constant or comes
// from tests/support/oracles.hpp; the library only supplies the numbers under
// test. Prints one PASS/FAIL line per criterion and exits nonzero on failure.
//
//   mmtherm_acceptance [--criterion N]...
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "mmtherm/bayes.hpp"
#include "mmtherm/errors.hpp"
#include "mmtherm/matrixcore.hpp"
#include "mmtherm/measure.hpp"
#include "mmtherm/metric.hpp"
#include "mmtherm/scenarios.hpp"
#include "mmtherm/specfun.hpp"
#include "mmtherm/thermo.hpp"

namespace {

using namespace mmtherm;
using oracle::pi;

// Tolerances, pinned.
constexpr double kTolNorm = 1e-7;
constexpr double kTolQ = 1e-7;
constexpr double kTolQLoose = 1e-6;
constexpr double kTolQTight = 1e-8;
constexpr double kTolE = 1e-7;
constexpr double kTolMoments = 1e-6;
constexpr double kTolMarginal = 1e-6;
constexpr double kTolPointwise = 1e-9;
constexpr double kTolShrink = 1e-4;
constexpr double kTolShrinkEnergy = 1e-5;
constexpr double kTolCurveIdentity = 1e-6;
constexpr double kTolRatioSpread = 1e-8;
constexpr double kTolGain = 1e-4;
constexpr double kTolSld = 1e-9;
constexpr double kTolReconstruct = 1e-12;
constexpr double kTolFiniteDiff = 1e-5;
constexpr double kTolVarDeriv = 1e-4;
constexpr double kTolEvidence = 1e-8;
constexpr double kBudgetSeconds = 5.0;

const std::vector<double> kBetas{0.1, 0.5, 1.0, 2.0, 5.0};

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

struct Criterion {
  std::vector<Check> checks;
  void add(std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
  // |value − target| ≤ tol.
  void near(const std::string& name, double value, double target, double tol) {
    std::ostringstream os;
    os << std::setprecision(12) << "value " << value << ", target " << target << ", tol " << tol;
    add(name, std::isfinite(value) && std::abs(value - target) <= tol, os.str());
  }
  void worst(const std::string& name, double dev, double tol, const std::string& where = {}) {
    std::ostringstream os;
    os << std::setprecision(4) << "max deviation " << dev << " (tol " << tol << ")" << where;
    add(name, std::isfinite(dev) && dev <= tol, os.str());
  }
};

Vector v1(double x) { return Vector::Constant(1, x); }

double rel(double a, double b) { return std::abs(a / b - 1.0); }

ThermoCurve curve(const std::string& id, MetricKind kind, const std::vector<double>& betas, bool shrink = false) {
  return scenario_thermo_curve(get_scenario(id), kind, betas, 1.0, shrink);
}

ThermoRow at_zero(const std::string& id, MetricKind kind = MetricKind::Minimal) {
  return curve(id, kind, {0.0}).rows.at(0);
}

double worst_q(const ThermoCurve& c, const std::function<double(double)>& q) {
  double w = 0.0;
  for (const auto& r : c.rows) w = std::max(w, rel(r.q_num, q(r.beta)));
  return w;
}

double worst_e(const ThermoCurve& c, const std::function<double(double)>& e) {
  double w = 0.0;
  for (const auto& r : c.rows) w = std::max(w, std::abs(r.e_num - e(r.beta)));
  return w;
}

// Points of a family's region with λ_min(ρ) ≥ 1e-3, by rejection in the bounding box.
std::vector<Vector> interior_points(const Scenario& s, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box box = bounding_box(s.region);
  std::vector<Vector> out;
  while (static_cast<int>(out.size()) < n) {
    Vector t(static_cast<Eigen::Index>(box.sides.size()));
    for (std::size_t k = 0; k < box.sides.size(); ++k)
      t(static_cast<Eigen::Index>(k)) = box.sides[k].a + (box.sides[k].b - box.sides[k].a) * u(rng);
    if (!contains(s.region, t)) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((*s.family)(t));
    if (es.eigenvalues().minCoeff() < 1e-3) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<Eigen::MatrixXcd> directions(const AffineFamily& f) {
  std::vector<Eigen::MatrixXcd> d;
  for (Eigen::Index k = 0; k < f.param_count(); ++k) d.push_back(f.direction(k));
  return d;
}

// Closed forms normalized to Q(0) = 1, written out here from oracle special functions.
double q_s21(double x) {
  return std::exp(-x) * std::sqrt(pi) * oracle::erfi(std::sqrt(2 * x)) / (2 * std::sqrt(2 * x));
}
double q_s3(double x) {
  return 3 * std::exp(-x) * ((1 + 2 * x) * std::sqrt(pi) * oracle::erfi(std::sqrt(x)) - 2 * std::sqrt(x) * std::exp(x)) /
         (8 * std::pow(x, 1.5));
}

// ---------------------------------------------------------------------------

Criterion c1() {
  Criterion c;
  const auto& s = get_scenario("s21");
  const auto t0 = std::chrono::steady_clock::now();
  const double z = integrate(s.volume(MetricKind::Minimal), s.region, 1e-10);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.near("s21 triangle normalization = pi/2", z, pi / 2, kTolNorm);
  c.add("s21 normalization within the time budget", secs < kBudgetSeconds, std::to_string(secs) + " s");
  return c;
}

Criterion c2() {
  Criterion c;
  c.worst("s21 Q against the erfi form (relative)", worst_q(curve("s21", MetricKind::Minimal, kBetas), q_s21), kTolQ);
  const auto r0 = at_zero("s21");
  c.near("s21 beta -> 0 energy = h/3", r0.e_num, 1.0 / 3, kTolMoments);
  c.near("s21 beta -> 0 variance = 16h^2/45", r0.var_num, 16.0 / 45, kTolMoments);
  return c;
}

Criterion c3() {
  Criterion c;
  const Prior p = scenario_prior(get_scenario("s22"), MetricKind::Minimal);
  c.near("s22 ellipse normalization = pi/(2 sqrt2)", p.normalization(), pi / (2 * std::sqrt(2.0)), kTolNorm);
  const Tabulated1D m = marginal(p, 1, 41);
  double w = 0.0;
  for (double d : m.density()) w = std::max(w, std::abs(d - 0.5));
  c.worst("s22 zeta marginal uniform 1/2", w, kTolMarginal);
  const auto cv = curve("s22", MetricKind::Minimal, kBetas);
  c.worst("s22 Q = sinh(x)/x (relative)", worst_q(cv, [](double x) { return std::sinh(x) / x; }), kTolQTight);
  c.worst("s22 E = -h langevin", worst_e(cv, [](double x) { return -oracle::langevin(x); }), kTolE);
  c.near("s22 beta -> 0 variance = h^2/3", at_zero("s22").var_num, 1.0 / 3, kTolMoments);
  return c;
}

Criterion c4() {
  Criterion c;
  const Prior p = scenario_prior(get_scenario("s23"), MetricKind::Minimal);
  const std::vector<double> g{0.2, 0.7, 1.5, 3.0, 5.0};
  double w = 0.0;
  for (const auto& row : bivariate_partition(p, 1.0, g, g))
    w = std::max(w, rel(row.q_num, oracle::bessel_i(0, row.beta_xi / 2) * oracle::bessel_i(0, row.beta_zeta / 2)));
  c.worst("s23 bivariate Q on a 5x5 grid (relative)", w, kTolQ);
  for (const char* id : {"s23a", "s23b"})
    c.worst(std::string(id) + " Q = I0(x/2) (relative)",
            worst_q(curve(id, MetricKind::Minimal, kBetas), [](double x) { return oracle::bessel_i(0, x / 2); }),
            kTolQLoose);
  return c;
}

Criterion c5() {
  Criterion c;
  const auto& s = get_scenario("s24");
  const Prior p = scenario_prior(s, MetricKind::Minimal);
  auto p1 = [](double z) { return std::sqrt(3.0) / (pi * std::sqrt(1 - 3 * z) * std::sqrt(1 + z)); };
  double w = 0.0;
  for (const auto& t : interior_points(s, 25, 5)) w = std::max(w, rel(p.density(t), p1(t(0))));
  c.worst("s24 prior against sqrt3/(pi sqrt(1-3z) sqrt(1+z)), 25 points (relative)", w, kTolPointwise);
  c.worst("s24 Q = e^{x/3} I0(2x/3) (relative)",
          worst_q(curve("s24", MetricKind::Minimal, kBetas),
                  [](double x) { return std::exp(x / 3) * oracle::bessel_i(0, 2 * x / 3); }),
          kTolQ);
  auto moment = [&](int k) {
    return oracle::integrate_endpoints([&](double z) { return std::pow(z, k) * p1(z); }, -1.0, 1.0 / 3);
  };
  const double m1 = moment(1), var = moment(2) - m1 * m1;
  const auto r0 = at_zero("s24");
  c.near("s24 beta -> 0 energy = -h/3", r0.e_num, -1.0 / 3, kTolMoments);
  c.near("s24 moment oracle variance = 2h^2/9", var, 2.0 / 9, 1e-10);
  c.near("s24 beta -> 0 variance matches the moment oracle", r0.var_num, var, kTolMoments);
  return c;
}

Criterion c6() {
  Criterion c;
  const double a = 1 / std::sqrt(3.0);
  c.near("E(8/9) against the AGM", ellip_e(8.0 / 9), oracle::ellip_e(8.0 / 9), 1e-13);
  const auto& ref = get_scenario("s25-3").reference.at(MetricKind::Minimal);
  c.near("s25-3 normalized E(8/9) element integrates to 1",
         oracle::integrate_endpoints([&](double z) { return ref.fn(v1(z)); }, -a, a), 1.0, kTolNorm);
  c.worst("s25-4 Q = e^{-x/3} I0(2x/3) (relative)",
          worst_q(curve("s25-4", MetricKind::Minimal, kBetas),
                  [](double x) { return std::exp(-x / 3) * oracle::bessel_i(0, 2 * x / 3); }),
          kTolQ);
  c.near("s25-4 beta -> 0 energy = +h/3", at_zero("s25-4").e_num, 1.0 / 3, kTolMoments);
  auto same = [&](const char* x, const char* y) {
    const auto a_ = curve(x, MetricKind::Minimal, kBetas), b_ = curve(y, MetricKind::Minimal, kBetas);
    double w = 0.0;
    for (std::size_t i = 0; i < a_.rows.size(); ++i) {
      w = std::max(w, std::abs(a_.rows[i].q_num - b_.rows[i].q_num));
      w = std::max(w, std::abs(a_.rows[i].e_num - b_.rows[i].e_num));
      w = std::max(w, std::abs(a_.rows[i].var_num - b_.rows[i].var_num));
    }
    c.worst(std::string(x) + " thermo curve equals " + y, w, kTolCurveIdentity);
  };
  same("s25-5", "s25-3");
  same("s25-6", "s24");
  return c;
}

Criterion c7() {
  Criterion c;
  c.worst("s26-3 Q = I0(x/3) (relative)",
          worst_q(curve("s26-3", MetricKind::Minimal, kBetas), [](double x) { return oracle::bessel_i(0, x / 3); }),
          kTolQ);
  c.near("s26-3 beta -> 0 variance = h^2/18", at_zero("s26-3").var_num, 1.0 / 18, kTolMoments);

  const auto& s = get_scenario("s26-5");
  const DensityFn vol = s.volume(MetricKind::Minimal);
  auto expr = [](double z) {
    return std::sqrt(15.0) * std::sqrt(1 - 21 * z * z) /
           (2 * std::sqrt((1 - 3 * z) * (1 + 3 * z) * (1 - 5 * z) * (1 + 7 * z)));
  };
  double w = 0.0;
  for (const auto& t : interior_points(s, 25, 7)) w = std::max(w, rel(vol(t), expr(t(0))));
  c.worst("s26-5 volume element matches the closed expression, 25 points (relative)", w, kTolPointwise);
  const auto probe = probe_divergence([&](double z) { return vol(v1(z)); }, -1.0 / 7, 1.0 / 5);
  std::ostringstream os;
  os << std::setprecision(10) << "library estimates";
  for (double e : probe.estimates) os << ' ' << e;
  os << "; tail ratio " << probe.tail_ratio << "; oracle integral "
     << oracle::integrate_endpoints(expr, -1.0 / 7, 1.0 / 5, 256);
  c.add("s26-5 normalization integral reported divergent", probe.divergent, os.str());
  return c;
}

Criterion c8() {
  Criterion c;
  const auto& s = get_scenario("s3");
  auto ref = [](double v) { return 3 * v / (4 * std::sqrt(1 - v)); };
  const Prior m = axis_marginal_prior(scenario_prior(s, MetricKind::Minimal), 0);
  double w = 0.0;
  for (int i = 1; i < 20; ++i) w = std::max(w, std::abs(m.density(v1(0.05 * i)) - ref(0.05 * i)));
  c.worst("s3 v marginal = 3v/(4 sqrt(1-v))", w, kTolNorm);
  c.worst("s3 Q against the erfi form (relative)", worst_q(curve("s3", MetricKind::Minimal, kBetas), q_s3), kTolQ);
  const auto r0 = at_zero("s3");
  c.near("s3 beta -> 0 energy = 4h/5", r0.e_num, 0.8, kTolMoments);
  c.near("s3 beta -> 0 variance = 8h^2/175", r0.var_num, 8.0 / 175, kTolMoments);
  const auto lim = scenario_shrink_limit(s, MetricKind::Maximal).marginal.normalized();
  double ws = 0.0;
  for (std::size_t i = 0; i < lim.size(); ++i) {
    const double v = lim.x()[i];
    if (v > 0.02 && v < 0.98) ws = std::max(ws, rel(lim.density()[i], ref(v)));
  }
  c.worst("s3 maximal R -> 1 marginal = 3v/(4 sqrt(1-v)) (relative, v in (0.02, 0.98))", ws, kTolShrink);
  return c;
}

Criterion c9() {
  Criterion c;
  const auto cmin = curve("bloch-min", MetricKind::Minimal, kBetas);
  c.worst("Bloch minimal Q = 2 I1(x)/x (relative)",
          worst_q(cmin, [](double x) { return 2 * oracle::bessel_i(1, x) / x; }), kTolQ);
  c.worst("Bloch minimal E = -h I2/I1",
          worst_e(cmin, [](double x) { return -oracle::bessel_i(2, x) / oracle::bessel_i(1, x); }), kTolE);
  const Prior mm = energy_axis_prior(get_scenario("bloch-min"), MetricKind::Minimal, false);
  double w = 0.0;
  for (int i = -9; i <= 9; ++i) {
    const double x = 0.1 * i;
    w = std::max(w, std::abs(mm.density(v1(x)) - 2 * std::sqrt(1 - x * x) / pi));
  }
  c.worst("Bloch minimal marginal = 2 sqrt(1 - xi^2)/pi", w, kTolNorm);

  const auto& smax = get_scenario("bloch-max");
  const auto lim = scenario_shrink_limit(smax, MetricKind::Maximal).marginal.normalized();
  double wu = 0.0;
  for (double d : lim.density()) wu = std::max(wu, std::abs(d - 0.5));
  c.worst("Bloch maximal shrink-limit marginal uniform 1/2", wu, kTolShrink);
  const auto cmax = curve("bloch-max", MetricKind::Maximal, kBetas, true);
  c.worst("Bloch maximal shrink-limit E = -h langevin", worst_e(cmax, [](double x) { return -oracle::langevin(x); }),
          kTolShrinkEnergy);
  const Prior slice = axis_marginal_prior(conditional_slice_prior(smax.volume(MetricKind::Minimal), smax.region, 2, 0.0), 0);
  const auto cs = thermo_curve(slice, {v1(1.0), 1.0}, kBetas);
  double wc = 0.0;
  for (std::size_t i = 0; i < cs.rows.size(); ++i) {
    wc = std::max(wc, rel(cs.rows[i].q_num, cmax.rows[i].q_num));
    wc = std::max(wc, std::abs(cs.rows[i].e_num - cmax.rows[i].e_num));
  }
  c.worst("conditional slice xi3 = 0 agrees with the maximal shrink route", wc, kTolShrink);
  return c;
}

Criterion c10() {
  Criterion c;
  const auto cmin = curve("quat-min", MetricKind::Minimal, kBetas);
  c.worst("quaternionic minimal Q = 8 I2(x)/x^2 (relative)",
          worst_q(cmin, [](double x) { return 8 * oracle::bessel_i(2, x) / (x * x); }), kTolQLoose);
  c.worst("quaternionic minimal E = -h I3/I2",
          worst_e(cmin, [](double x) { return -oracle::bessel_i(3, x) / oracle::bessel_i(2, x); }), kTolQLoose);
  const auto cmax = curve("quat-max", MetricKind::Maximal, kBetas, true);
  c.worst("quaternionic maximal shrink-limit E = -h I_{5/2}/I_{3/2}",
          worst_e(cmax, [](double x) { return -oracle::bessel_i_half(5, x) / oracle::bessel_i_half(3, x); }),
          kTolShrink);
  return c;
}

Criterion c11() {
  Criterion c;
  {
    const auto& s = get_scenario("s21");
    double lo = 1e300, hi = -1e300, wo = 0.0;
    for (const auto& t : interior_points(s, 25, 11)) {
      const MetricTensor gmin = bures_tensor(*s.family, t), gmax = maximal_tensor(*s.family, t);
      const auto o = oracle::metric_tensors((*s.family)(t), directions(*s.family));
      wo = std::max({wo, (gmin - o.minimal).norm() / o.minimal.norm(), (gmax - o.maximal).norm() / o.maximal.norm()});
      for (Eigen::Index k = 0; k < gmin.size(); ++k) {
        if (std::abs(gmin(k)) < 1e-12 * gmin.cwiseAbs().maxCoeff()) continue;
        lo = std::min(lo, gmax(k) / gmin(k));
        hi = std::max(hi, gmax(k) / gmin(k));
      }
    }
    c.worst("s21 tensors agree with the eigensolver oracle (relative)", wo, 1e-10);
    c.worst("s21 maximal tensor proportional to minimal (ratio spread)", hi - lo, kTolRatioSpread);
  }
  // The general kernels, not the commuting shortcut, so the two kinds are computed independently.
  auto general = [](const Scenario& s, MetricKind kind) {
    auto ev = std::make_shared<const MetricEvaluator>(*s.family, kind, false);
    return normalize_prior(memoize([ev](const Vector& t) { return ev->quadrature_volume(t); }), s.region);
  };
  for (const char* id : {"s23", "s24", "s25-4", "s26-3"}) {
    const auto& s = get_scenario(id);
    const Prior pmin = general(s, MetricKind::Minimal), pmax = general(s, MetricKind::Maximal);
    double w = 0.0, lo = 1e300, hi = -1e300;
    for (const auto& t : interior_points(s, 25, 1100)) {
      w = std::max(w, rel(pmax.density(t), pmin.density(t)));
      const auto o = oracle::metric_tensors((*s.family)(t), directions(*s.family));
      const double d = std::sqrt(o.maximal.determinant() / o.minimal.determinant());
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    c.worst(std::string(id) + " maximal prior equals minimal prior (relative)", w, kTolQ);
    c.worst(std::string(id) + " oracle volume ratio constant (spread)", hi - lo, kTolRatioSpread);
  }
  {
    const auto& s = get_scenario("s25-3");
    const Prior pmax = general(s, MetricKind::Maximal);
    double w = 0.0;
    for (const auto& t : interior_points(s, 25, 253))
      w = std::max(w, rel(pmax.density(t), std::sqrt(3.0) / (pi * std::sqrt(1 - 3 * t(0) * t(0)))));
    c.worst("s25-3 maximal prior = sqrt3/(pi sqrt(1 - 3 zeta^2)) (relative)", w, kTolQ);
    c.worst("s25-3 maximal Q = I0(x/sqrt3) (relative)",
            worst_q(thermo_curve(pmax, {v1(1.0), 1.0}, kBetas),
                    [](double x) { return oracle::bessel_i(0, x / std::sqrt(3.0)); }),
            kTolQ);
  }
  return c;
}

Criterion c12() {
  Criterion c;
  struct Printed {
    const char* id;
    const char* seq;
    double value;
  };
  const std::vector<Printed> printed{
      {"s21", "D", 0.431946},   {"s21", "A", 0.125093},   {"s21", "AD", 0.542771},  {"s21", "AA", 0.0427712},
      {"s21", "DD", 0.110826},  {"s21", "DA", 0.235918},  {"s22", "A", 0.193147},   {"s22", "AD", 0.265279},
      {"s22", "AA", 0.0721318}, {"s24", "A", 0.306853},   {"s24", "D", 0.0646381},  {"s24", "AA", 0.0680544},
      {"s24", "DD", 0.0470689}, {"s24", "DA", 0.427868},  {"s24", "AD", 0.0516789},
  };
  std::map<std::string, std::pair<Prior, std::vector<LabelledLikelihood>>> models;
  for (const char* id : {"s21", "s22", "s24"}) {
    const auto& s = get_scenario(id);
    const Prior p = scenario_prior(s, MetricKind::Minimal);
    auto ls = scenario_likelihoods(s, true);
    // s22's agreement probability reads only its second coordinate.
    if (std::string(id) == "s22")
      models.emplace(id, std::pair{axis_marginal_prior(p, 1), restrict_to_axis(ls, 2, 1)});
    else
      models.emplace(id, std::pair{p, ls});
  }
  for (const auto& g : printed) {
    const auto& [p, ls] = models.at(g.id);
    c.near(std::string(g.id) + " gain after " + g.seq, sequential_gains(p, ls, g.seq).back().gain_nats, g.value,
           kTolGain);
  }
  c.near("s24 expected gain", expected_gain(models.at("s24").first, models.at("s24").second).expected_gain_nats,
         0.145376, kTolGain);

  const auto& [p21, l21] = models.at("s21");
  const auto grouped = expected_gain(p21, l21);
  const auto ungrouped = expected_gain(p21, scenario_likelihoods(get_scenario("s21"), false));
  // The expectation rebuilt from the printed per-outcome gains and evidences 2/3, 1/3.
  const double from_printed = 2.0 / 3 * 0.125093 + 1.0 / 3 * 0.431946;
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << "printed 0.329662; grouped " << grouped.expected_gain_nats
     << "; four-outcome " << ungrouped.expected_gain_nats << "; from printed per-outcome gains " << from_printed;
  const bool emitted = std::isfinite(grouped.expected_gain_nats) && std::isfinite(ungrouped.expected_gain_nats);
  c.add("s21 expected gain 0.329662: discrepancy analysis emitted", emitted, os.str());
  c.near("s21 grouped expectation equals the printed per-outcome average", grouped.expected_gain_nats, from_printed,
         kTolGain);
  return c;
}

Eigen::MatrixXcd random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return 0.5 * (a + a.adjoint());
}

Criterion c13() {
  Criterion c;
  {
    double wsld = 0.0, worder = 0.0;
    int points = 0;
    const std::vector<std::pair<std::string, int>> plan{{"s21", 20}, {"s22", 20}, {"s23", 20}, {"s24", 20}, {"s26-3", 20}};
    for (const auto& [id, n] : plan) {
      const auto& s = get_scenario(id);
      for (const auto& t : interior_points(s, n, 1300 + points)) {
        const MetricTensor gb = bures_tensor(*s.family, t), gm = maximal_tensor(*s.family, t);
        const Eigen::MatrixXd gs = oracle::sld_tensor((*s.family)(t), directions(*s.family));
        wsld = std::max(wsld, (gb - gs).cwiseAbs().maxCoeff() / gs.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm - gb);
        worder = std::min(worder, es.eigenvalues().minCoeff() / gm.norm());
        ++points;
      }
    }
    c.worst("Bures against the SLD linear solve, " + std::to_string(points) + " points (relative)", wsld, kTolSld);
    c.add("maximal - minimal positive semidefinite at every point", worder >= -1e-12,
          "smallest scaled eigenvalue " + std::to_string(worder));
  }
  {
    std::mt19937_64 rng(64);
    double wrec = 0.0, wval = 0.0, worth = 0.0;
    for (Eigen::Index n : {2, 3, 4, 8, 16, 32, 64}) {
      const Eigen::MatrixXcd h = random_hermitian(n, rng);
      const auto es = eigensystem(h);
      const double scale = h.norm();
      wrec = std::max(wrec, (reconstruct(es) - h).norm() / scale);
      worth = std::max(worth, (es.eigenvectors.adjoint() * es.eigenvectors - Eigen::MatrixXcd::Identity(n, n)).norm());
      Eigen::VectorXd mine = es.eigenvalues;
      std::sort(mine.data(), mine.data() + n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(h);
      wval = std::max(wval, (mine - ref.eigenvalues()).cwiseAbs().maxCoeff() / scale);
    }
    c.worst("eigendecomposition reconstruction up to n = 64 (relative)", wrec, kTolReconstruct);
    c.worst("eigenvector orthonormality up to n = 64", worth, kTolReconstruct);
    c.worst("eigenvalues against Eigen's solver up to n = 64 (relative)", wval, kTolReconstruct);
  }
  {
    const double d = 1e-4;
    double wfd = 0.0, wvar = 0.0;
    std::string where;
    for (const char* id : {"s21", "s22", "s23a", "s24", "s25-3", "s25-4", "s26-3", "s3", "bloch-min", "quat-min",
                           "single-min"}) {
      for (double x : {0.5, 1.0, 2.0}) {
        const auto cv = curve(id, MetricKind::Minimal, {x - d, x, x + d});
        const double fd = -(std::log(cv.rows[2].q_num) - std::log(cv.rows[0].q_num)) / (2 * d);
        if (std::abs(fd - cv.rows[1].e_num) > wfd) {
          wfd = std::abs(fd - cv.rows[1].e_num);
          where = std::string(" at ") + id;
        }
        wvar = std::max(wvar, std::abs((cv.rows[2].e_num - cv.rows[0].e_num) / (2 * d) + cv.rows[1].var_num));
      }
    }
    c.worst("-dlogQ/dbeta by finite differences against the moment ratio", wfd, kTolFiniteDiff, where);
    c.worst("dE/dbeta = -Var", wvar, kTolVarDeriv);
  }
  {
    double w = 0.0;
    for (const char* id : {"s21", "s21-anti", "s24"})
      for (bool grouped : {true, false}) {
        const auto& s = get_scenario(id);
        w = std::max(w, std::abs(expected_gain(scenario_prior(s, MetricKind::Minimal), scenario_likelihoods(s, grouped))
                                     .evidence_sum() -
                                 1.0));
      }
    const auto& s22 = get_scenario("s22");
    const Prior m22 = axis_marginal_prior(scenario_prior(s22, MetricKind::Minimal), 1);
    w = std::max(w, std::abs(expected_gain(m22, restrict_to_axis(scenario_likelihoods(s22, true), 2, 1)).evidence_sum() - 1.0));
    c.worst("evidences sum to 1", w, kTolEvidence);
  }
  return c;
}

const std::map<int, std::pair<std::string, std::function<Criterion()>>> kCriteria{
    {1, {"two-spin triangle normalization", c1}},
    {2, {"two-spin thermodynamics", c2}},
    {3, {"ellipse scenario", c3}},
    {4, {"square scenario", c4}},
    {5, {"equal-correlation scenario", c5}},
    {6, {"highest-order multi-spin correlations", c6}},
    {7, {"next-to-highest-order correlations", c7}},
    {8, {"three-level extension", c8}},
    {9, {"Bloch ball", c9}},
    {10, {"quaternionic ball", c10}},
    {11, {"coincidence of the minimal and maximal metrics", c11}},
    {12, {"information gains", c12}},
    {13, {"property suites", c13}},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--criterion", only, "criterion number (repeatable); all by default")->check(CLI::Range(1, 13));
  CLI11_PARSE(app, argc, argv);
  if (only.empty())
    for (const auto& [id, _] : kCriteria) only.push_back(id);

  bool all = true;
  for (int id : only) {
    const auto& [title, run] = kCriteria.at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.add("criterion raised", false, e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = !c.checks.empty();
    for (const auto& k : c.checks) ok = ok && k.ok;
    all = all && ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << std::setprecision(3)
              << secs << " s)\n";
    for (const auto& k : c.checks) std::cout << "    " << (k.ok ? "ok   " : "FAIL ") << k.name << "  [" << k.detail << "]\n";
    std::cout.flush();
  }
  return all ? 0 : 1;
}

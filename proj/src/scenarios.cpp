// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <tuple>

#include <json.hpp>

#include "mmtherm/errors.hpp"
#include "mmtherm/specfun.hpp"

namespace mmtherm {

bool Scenario::supports(MetricKind k) const { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); }
bool Scenario::is_improper(MetricKind k) const { return std::find(improper.begin(), improper.end(), k) != improper.end(); }
bool Scenario::has_closed_form(MetricKind k) const {
  return std::find(closed_kinds.begin(), closed_kinds.end(), k) != closed_kinds.end() && closed_form(id).has_value();
}

namespace {

using Form = ReferenceDensity::Form;
constexpr double kPi = std::numbers::pi;
const std::vector<MetricKind> kBoth{MetricKind::Minimal, MetricKind::Maximal};

PauliWord word(std::initializer_list<int> l) { return PauliWord(l); }

// Every word carrying letter i ∈ {x, y, z} on each k-subset of m positions.
ParameterSpec correlation(const std::string& name, int m, int k) {
  ParameterSpec spec{name, {}};
  std::vector<int> pick(static_cast<std::size_t>(m), 0);
  std::fill(pick.end() - k, pick.end(), 1);
  do {
    for (int letter = 1; letter <= 3; ++letter) {
      std::vector<std::uint8_t> w(static_cast<std::size_t>(m), 0);
      for (int p = 0; p < m; ++p)
        if (pick[static_cast<std::size_t>(p)]) w[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(letter);
      spec.terms.push_back({PauliWord(w), 1.0});
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  return spec;
}

std::shared_ptr<const AffineFamily> family(std::vector<ParameterSpec> spec) {
  return std::make_shared<const AffineFamily>(build_family(spec));
}

std::function<DensityFn(MetricKind)> metric_volume(std::shared_ptr<const AffineFamily> fam) {
  return [fam](MetricKind kind) -> DensityFn {
    auto ev = std::make_shared<const MetricEvaluator>(*fam, kind);
    return [ev](const Vector& t) { return ev->quadrature_volume(t); };
  };
}

EnergyObservable axis_energy(int dim, int axis) {
  Vector c = Vector::Zero(dim);
  c(axis) = 1.0;
  return {c, 1.0};
}

double sq(double x) { return x * x; }

// The three-level family, integrated in (v, r) with r the Bloch-like radius of
// the outer levels; the (x, y, z) sphere contributes 4πr².
std::shared_ptr<const AffineFamily> three_level_family() {
  using C = std::complex<double>;
  HermitianMatrix base = HermitianMatrix::Zero(3, 3);
  base(1, 1) = 1.0;
  HermitianMatrix dv = HermitianMatrix::Zero(3, 3), dx = dv, dy = dv, dz = dv;
  dv(0, 0) = 0.5;
  dv(1, 1) = -1.0;
  dv(2, 2) = 0.5;
  dx(0, 2) = dx(2, 0) = 0.5;
  dy(0, 2) = C(0, -0.5);
  dy(2, 0) = C(0, 0.5);
  dz(0, 0) = 0.5;
  dz(2, 2) = -0.5;
  return std::make_shared<const AffineFamily>(
      base, std::vector<AffineFamily::Parameter>{{"v", dv}, {"x", dx}, {"y", dy}, {"z", dz}});
}

Scenario two_parameter(const std::string& id, std::string description, std::string group,
                       std::vector<ParameterSpec> spec, Region region) {
  Scenario s;
  s.id = id;
  s.description = std::move(description);
  s.group = std::move(group);
  s.coords = {spec[0].name, spec[1].name};
  s.family = family(std::move(spec));
  s.region = std::move(region);
  s.energy = axis_energy(2, 1);
  s.kinds = kBoth;
  s.volume = metric_volume(s.family);
  return s;
}

Scenario one_parameter(const std::string& id, std::string description, std::string group, ParameterSpec spec,
                       Region region) {
  Scenario s;
  s.id = id;
  s.description = std::move(description);
  s.group = std::move(group);
  s.coords = {spec.name};
  s.family = family({std::move(spec)});
  s.region = std::move(region);
  s.energy = axis_energy(1, 0);
  s.kinds = kBoth;
  s.volume = metric_volume(s.family);
  s.closed_kinds = kBoth;  // one-parameter families commute, so both kinds coincide
  return s;
}

ReferenceDensity normalized(std::function<double(double)> f, std::string formula) {
  return {[f = std::move(f)](const Vector& t) { return f(t(0)); }, Form::Normalized, std::move(formula), true, {}};
}

Scenario ball_scenario(const std::string& id, MetricKind kind) {
  Scenario s;
  s.id = id;
  s.group = "ball";
  s.kinds = kBoth;
  s.default_kind = kind;
  s.closed_kinds = {kind};
  s.improper = {MetricKind::Maximal};
  s.energy = axis_energy(id.rfind("bloch", 0) == 0 ? 3 : 5, 0);
  if (id.rfind("bloch", 0) == 0) {
    s.description = "qubit Bloch ball, rho = (I + xi.sigma)/2, volume element (1 - r^2)^(-u), u = 1/2 or 3/2";
    s.coords = {"xi1", "xi2", "xi3"};
    s.family = family({{"xi1", {{word({1}), 1.0}}}, {"xi2", {{word({2}), 1.0}}}, {"xi3", {{word({3}), 1.0}}}});
    s.region = Ball{3, 1.0};
    s.volume = metric_volume(s.family);
    s.reference[MetricKind::Minimal] = {[](const Vector& t) { return 1.0 / (kPi * kPi * std::sqrt(1.0 - t.squaredNorm())); },
                                        Form::Normalized, "1/(pi^2 sqrt(1 - r^2))", true, {}};
    s.reference[MetricKind::Maximal] = {[](const Vector& t) { return std::pow(1.0 - t.squaredNorm(), -1.5); },
                                        Form::Proportional, "(1 - r^2)^(-3/2)", true, {}};
  } else {
    s.description = "quaternionic two-level systems as radial weights (1 - r^2)^(-u) on the unit 5-ball, u = 1/2 or 5/2";
    s.coords = {"xi1", "xi2", "xi3", "xi4", "xi5"};
    s.region = Ball{5, 1.0};
    s.volume = [](MetricKind k) -> DensityFn {
      const double u = k == MetricKind::Minimal ? 0.5 : 2.5;
      return [u](const Vector& t) { return std::pow(1.0 - t.squaredNorm(), -u); };
    };
    s.reference[MetricKind::Minimal] = {[](const Vector& t) { return std::pow(1.0 - t.squaredNorm(), -0.5); },
                                        Form::Unnormalized, "(1 - r^2)^(-1/2)", true, {}};
    s.reference[MetricKind::Maximal] = {[](const Vector& t) { return std::pow(1.0 - t.squaredNorm(), -2.5); },
                                        Form::Unnormalized, "(1 - r^2)^(-5/2)", true, {}};
    s.notes.push_back("quaternionic matrices are outside the Hermitian-matrix core; the radial weights stand in for the metric");
  }
  return s;
}

std::vector<Scenario> build_registry() {
  std::vector<Scenario> out;
  const ParameterSpec xi{"xi", {{word({1, 0}), 1.0}, {word({0, 1}), 1.0}}};

  {
    auto s = two_parameter("s21", "two spins polarized along one axis and correlated along it", "two-spin",
                           {xi, {"zeta11", {{word({1, 1}), 1.0}}}},
                           Triangle{{Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 1)}});
    s.closed_kinds = kBoth;
    s.normalization[MetricKind::Minimal] = kPi / 2;
    s.measurement_axis = 1;
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) {
          const double x = t(0), z = t(1);
          return 1.0 / (2.0 * std::sqrt(2.0)) / std::sqrt((-1 + 2 * x - z) * (-1 + z) * (1 + 2 * x + z));
        },
        Form::Unnormalized, "1/(2 sqrt 2) ((-1+2xi-zeta)(-1+zeta)(1+2xi+zeta))^(-1/2)", true, {}};
    s.notes.push_back("zeta11 marginal 1/(2 sqrt(2) sqrt(1 - zeta11))");
    out.push_back(std::move(s));
  }
  {
    auto s = two_parameter("s21-anti", "anticorrelated variant: xi(b) = -xi(a)", "two-spin",
                           {{"xi", {{word({1, 0}), 1.0}, {word({0, 1}), -1.0}}}, {"zeta11", {{word({1, 1}), 1.0}}}},
                           Triangle{{Eigen::Vector2d(0, 1), Eigen::Vector2d(1, -1), Eigen::Vector2d(-1, -1)}});
    s.normalization[MetricKind::Minimal] = kPi / 2;
    s.measurement_axis = 1;
    out.push_back(std::move(s));
  }
  {
    Ellipse e;
    e.shape = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    auto s = two_parameter("s22", "polarized along one axis, correlated along an orthogonal one", "two-spin",
                           {xi, {"zeta22", {{word({2, 2}), 1.0}}}}, e);
    s.closed_kinds = {MetricKind::Minimal};
    s.improper = {MetricKind::Maximal};
    s.normalization[MetricKind::Minimal] = kPi / (2 * std::sqrt(2.0));
    s.measurement_axis = 2;
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) { return 1.0 / (kPi * std::sqrt(1 - 4 * sq(t(0)) - sq(t(1)))); }, Form::Normalized,
        "1/(pi sqrt(1 - 4 xi^2 - zeta22^2))", true, {}};
    s.reference[MetricKind::Maximal] = {
        [](const Vector& t) {
          const double x = t(0), z = t(1);
          return std::sqrt(2.0) * std::sqrt(1 - z * z - 2 * x * x) / (4 * std::sqrt(1 - z * z) * (1 - 4 * x * x - z * z));
        },
        Form::Unnormalized, "sqrt2 sqrt(1 - zeta^2 - 2 xi^2)/(4 sqrt(1 - zeta^2)(1 - 4 xi^2 - zeta^2))", true,
        "the radicand written as (zeta^2 + 2 xi^2 - 1) is negative on the interior; sign fixed, overall factor 1/4"};
    out.push_back(std::move(s));
  }
  {
    auto s = two_parameter("s23", "correlated in two orthogonal directions (square domain)", "two-spin",
                           {xi, {"zeta", {{word({2, 2}), 1.0}, {word({3, 3}), 1.0}}}},
                           Box{{Interval{-0.5, 0.5}, Interval{-0.5, 0.5}}});
    s.closed_kinds = kBoth;
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) { return 4.0 / (kPi * kPi * std::sqrt(1 - 4 * sq(t(0))) * std::sqrt(1 - 4 * sq(t(1)))); },
        Form::Normalized, "4/(pi^2 sqrt(1 - 4 xi^2) sqrt(1 - 4 zeta^2))", true, {}};
    s.notes.push_back("bivariate Q(beta_xi, beta_zeta) = I0(beta_xi h/2) I0(beta_zeta h/2)");
    out.push_back(std::move(s));
  }
  for (const auto& [id, sign] : {std::pair{"s23a", 1.0}, std::pair{"s23b", -1.0}}) {
    auto fam = family({{"zeta12", {{word({1, 2}), 1.0}, {word({2, 1}), sign}}}});
    auto s = one_parameter(id, std::string("one parameter with zeta21 = ") + (sign > 0 ? "+" : "-") + "zeta12", "two-spin",
                           {"zeta12", {{word({1, 2}), 1.0}, {word({2, 1}), sign}}},
                           Implicit{fam, Box{{Interval{-1.0, 1.0}}}, 0.0});
    s.reference[MetricKind::Minimal] = normalized([](double z) { return 2.0 / (kPi * std::sqrt(1 - 4 * z * z)); },
                                                  "2/(pi sqrt(1 - 4 zeta^2))");
    s.notes.push_back("feasible interval resolved from eigenvalue positivity");
    out.push_back(std::move(s));
  }
  auto p1 = [](double z) { return std::sqrt(3.0) / (kPi * std::sqrt(1 - 3 * z) * std::sqrt(1 + z)); };
  auto unsucc = [](double z) { return std::sqrt((3 - 8 * z * z) / (4 - 12 * z * z)) / ellip_e(8.0 / 9.0); };
  auto four1 = [](double z) { return std::sqrt(3.0) / (kPi * std::sqrt(1 - z) * std::sqrt(1 + 3 * z)); };
  auto mm1 = [](double z) { return std::sqrt(3.0) / (kPi * std::sqrt(1 - 3 * z * z)); };
  const double r3 = 1.0 / std::sqrt(3.0);
  {
    auto s = one_parameter("s24", "two spins, equal correlations along all three axes", "two-spin",
                           correlation("zeta11", 2, 2), Interval{-1.0, 1.0 / 3.0});
    s.reference[MetricKind::Minimal] = normalized(p1, "sqrt3/(pi sqrt(1 - 3 zeta) sqrt(1 + zeta))");
    s.measurement_axis = 3;
    s.notes.push_back("beta -> 0 variance is 2h^2/9 (the square of the mean would be h^2/9)");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s25-3", "three spins, highest-order correlations", "multi-spin", correlation("zeta111", 3, 3),
                           Interval{-r3, r3});
    s.closed_kinds.clear();
    s.reference[MetricKind::Minimal] = {[unsucc](const Vector& t) { return unsucc(t(0)); }, Form::Normalized,
                                        "sqrt((3 - 8 zeta^2)/(4 - 12 zeta^2))/E(8/9)", false,
                                        "the metric gives sqrt3/(pi sqrt(1 - 3 zeta^2)); this E(8/9) form is kept as a reference"};
    s.reference[MetricKind::Maximal] = normalized(mm1, "sqrt3/(pi sqrt(1 - 3 zeta^2))");
    s.notes.push_back("no closed-form partition function for the E(8/9) minimal prior");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s25-4", "four spins, highest-order correlations", "multi-spin", correlation("zeta1111", 4, 4),
                           Interval{-1.0 / 3.0, 1.0});
    s.reference[MetricKind::Minimal] = normalized(four1, "sqrt3/(pi sqrt(1 - zeta) sqrt(1 + 3 zeta))");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s25-5", "five spins, highest-order correlations", "multi-spin", correlation("zeta11111", 5, 5),
                           Interval{-r3, r3});
    s.closed_kinds.clear();
    s.reference[MetricKind::Minimal] = {[unsucc](const Vector& t) { return unsucc(t(0)); }, Form::Normalized,
                                        "sqrt((3 - 8 zeta^2)/(4 - 12 zeta^2))/E(8/9)", false,
                                        "same E(8/9) form as three spins; the metric gives sqrt3/(pi sqrt(1 - 3 zeta^2))"};
    s.reference[MetricKind::Maximal] = normalized(mm1, "sqrt3/(pi sqrt(1 - 3 zeta^2))");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s25-6", "six spins, highest-order correlations", "multi-spin", correlation("zeta111111", 6, 6),
                           Interval{-1.0, 1.0 / 3.0});
    s.reference[MetricKind::Minimal] = normalized(p1, "sqrt3/(pi sqrt(1 - 3 zeta) sqrt(1 + zeta))");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s26-3", "three spins, next-to-highest-order correlations", "multi-spin",
                           correlation("zeta110", 3, 2), Interval{-1.0 / 3.0, 1.0 / 3.0});
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) { return 6.0 / (kPi * std::sqrt(4 - 36 * sq(t(0)))); }, Form::Normalized,
        "6/(pi sqrt(4 - 36 zeta^2))", true,
        "the variant without the square root, 6/(pi (4 - 36 zeta^2)), diverges logarithmically at +-1/3"};
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s26-4-open", "four spins, next-to-highest-order correlations", "multi-spin",
                           correlation("zeta1110", 4, 3), Interval{-1.0 / (4 * std::sqrt(3.0)), 1.0 / (4 * std::sqrt(3.0))});
    s.unresolved = true;
    s.kinds.clear();
    s.closed_kinds.clear();
    s.notes.push_back("UNRESOLVED: eigenvectors were not determined; family and region only");
    out.push_back(std::move(s));
  }
  {
    auto s = one_parameter("s26-5", "five spins, next-to-highest-order correlations", "multi-spin",
                           correlation("zeta11110", 5, 4), Interval{-1.0 / 7.0, 1.0 / 5.0});
    s.closed_kinds.clear();
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) {
          const double z = t(0);
          return std::sqrt(15.0) * std::sqrt(1 - 21 * z * z) /
                 (2 * std::sqrt(1 - 3 * z) * std::sqrt(1 + 3 * z) * std::sqrt(1 - 5 * z) * std::sqrt(1 + 7 * z));
        },
        Form::Unnormalized, "sqrt15 sqrt(1 - 21 zeta^2)/(2 sqrt(1-3zeta) sqrt(1+3zeta) sqrt(1-5zeta) sqrt(1+7zeta))", true,
        {}};
    s.notes.push_back("reported as not normalizable; see the divergence probe in the validation report");
    out.push_back(std::move(s));
  }
  {
    Scenario s;
    s.id = "s3";
    s.description = "three-level extension, integrated in (v, r) with r^2 = x^2 + y^2 + z^2";
    s.group = "three-level";
    s.family = three_level_family();
    s.coords = {"v", "r"};
    s.region = Triangle{{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)}};
    s.energy = axis_energy(2, 0);
    s.kinds = kBoth;
    s.closed_kinds = kBoth;
    s.improper = {MetricKind::Maximal};
    auto fam = s.family;
    s.volume = [fam](MetricKind kind) -> DensityFn {
      auto ev = std::make_shared<const MetricEvaluator>(*fam, kind);
      return [ev](const Vector& t) {
        // Placing r on the z axis keeps ρ diagonal, so the small eigenvalue
        // (v − r)/2 is formed without cancellation inside the eigensolver.
        Vector full = Vector::Zero(4);
        full(0) = t(0);
        full(3) = t(1);
        return 4.0 * kPi * t(1) * t(1) * ev->quadrature_volume(full);
      };
    };
    s.shrink_regions = [](double R) -> Region {
      return Triangle{{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, R)}};
    };
    s.reference[MetricKind::Minimal] = {
        [](const Vector& t) {
          const double v = t(0), r = t(1);
          return 4.0 * kPi * r * r * 3.0 / (4.0 * kPi * kPi * v * std::sqrt(1 - v) * std::sqrt(v * v - r * r));
        },
        Form::Normalized, "4 pi r^2 * 3/(4 pi^2 v sqrt(1-v) sqrt(v^2 - r^2))", true, {}};
    s.reference[MetricKind::Maximal] = {
        [](const Vector& t) {
          const double v = t(0), r = t(1);
          return 4.0 * kPi * r * r * v / (16.0 * std::sqrt(1 - v) * std::pow(v * v - r * r, 1.5));
        },
        Form::Unnormalized, "4 pi r^2 * v/(16 sqrt(1-v) (v^2 - r^2)^(3/2))", true,
        "the form 1/(sqrt(1-v)(v^2 - r^2)) is not the metric volume; the form above is, with the same shrink-limit marginal"};
    s.notes.push_back("v marginal 3v/(4 sqrt(1 - v))");
    out.push_back(std::move(s));
  }
  out.push_back(ball_scenario("bloch-min", MetricKind::Minimal));
  out.push_back(ball_scenario("bloch-max", MetricKind::Maximal));
  out.push_back(ball_scenario("quat-min", MetricKind::Minimal));
  out.push_back(ball_scenario("quat-max", MetricKind::Maximal));
  {
    Scenario s;
    s.id = "single-min";
    s.description = "single spin, minimal-metric marginal 2 sqrt(1 - xi^2)/pi";
    s.group = "single-spin";
    s.coords = {"xi"};
    s.region = Interval{-1.0, 1.0};
    s.energy = axis_energy(1, 0);
    s.kinds = {MetricKind::Minimal};
    s.closed_kinds = {MetricKind::Minimal};
    s.volume = [](MetricKind) -> DensityFn {
      return [](const Vector& t) { return 2.0 * std::sqrt(std::max(0.0, 1.0 - t(0) * t(0))) / kPi; };
    };
    s.reference[MetricKind::Minimal] = normalized([](double x) { return 2.0 * std::sqrt(1.0 - x * x) / kPi; },
                                                  "2 sqrt(1 - xi^2)/pi");
    out.push_back(std::move(s));
  }
  return out;
}

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> r = build_registry();
  return r;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& s : registry()) v.push_back(s.id);
    return v;
  }();
  return ids;
}

const Scenario& get_scenario(const std::string& id) {
  for (const auto& s : registry())
    if (s.id == id) return s;
  std::string known;
  for (const auto& k : scenario_ids()) known += (known.empty() ? "" : ", ") + k;
  throw DomainError("unknown scenario '" + id + "' (available: " + known + ")");
}

Prior scenario_prior(const Scenario& s, MetricKind kind, double tol) {
  if (s.unresolved) throw DomainError("scenario '" + s.id + "' is unresolved: no metric evaluation is available");
  if (!s.supports(kind)) throw DomainError("scenario '" + s.id + "' does not support the " + std::string(to_string(kind)) + " metric");
  if (s.is_improper(kind)) throw DivergenceError("improper prior; use --shrink-limit", std::numeric_limits<double>::infinity());
  static std::mutex mutex;
  static std::map<std::tuple<std::string, MetricKind, double>, Prior> cache;
  const auto key = std::make_tuple(s.id, kind, tol);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  Prior p = normalize_prior(memoize(s.volume(kind)), s.region, tol, s.coords);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(p)).first->second;
}

ShrinkLimitResult scenario_shrink_limit(const Scenario& s, MetricKind kind, std::size_t grid) {
  if (s.unresolved) throw DomainError("scenario '" + s.id + "' is unresolved");
  const int axis = s.energy.single_axis();
  if (axis < 0) throw DomainError("shrink limit needs a single energy axis");
  if (!std::holds_alternative<Ball>(s.region) && !s.shrink_regions)
    throw DomainError("scenario '" + s.id + "' has no shrunken-domain family");
  // The limit costs seconds to minutes; keep one copy per scenario, kind and grid.
  static std::mutex mutex;
  static std::map<std::tuple<std::string, MetricKind, std::size_t>, ShrinkLimitResult> cache;
  const auto key = std::make_tuple(s.id, kind, grid);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const DensityFn vol = memoize(s.volume(kind));
  auto res = std::holds_alternative<Ball>(s.region)
                 ? shrink_limit_marginal(vol, std::get<Ball>(s.region), axis, {}, grid)
                 : shrink_limit_marginal(vol, *s.shrink_regions, axis, {}, grid);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(res)).first->second;
}

Prior energy_axis_prior(const Scenario& s, MetricKind kind, bool shrink_limit, std::size_t grid) {
  const int axis = s.energy.single_axis();
  if (axis < 0) throw DomainError("scenario energy must read a single coordinate");
  const std::string& name = s.coords[static_cast<std::size_t>(axis)];
  if (shrink_limit) return scenario_shrink_limit(s, kind, grid).marginal.normalized().as_prior(name);
  const Prior p = scenario_prior(s, kind);
  if (p.dim() == 1) return p;
  return axis_marginal_prior(p, axis);
}

ThermoCurve scenario_thermo_curve(const Scenario& s, MetricKind kind, const std::vector<double>& betas, double h,
                                  bool shrink_limit) {
  const Prior p = energy_axis_prior(s, kind, shrink_limit);
  const int axis = s.energy.single_axis();
  const EnergyObservable obs{Vector::Constant(1, s.energy.c(axis)), h};
  const auto cf = s.has_closed_form(kind) ? closed_form(s.id) : std::nullopt;
  auto curve = thermo_curve(p, obs, betas, cf ? &*cf : nullptr);
  curve.scenario = s.id;
  return curve;
}

std::vector<LabelledLikelihood> scenario_likelihoods(const Scenario& s, bool grouped) {
  if (s.measurement_axis == 0 || !s.family) throw DomainError("scenario '" + s.id + "' has no joint spin measurement");
  return model_likelihoods(*s.family, spin_measurement(2, s.measurement_axis, grouped));
}

std::string scenarios_json() {
  using nlohmann::json;
  json arr = json::array();
  for (const auto& s : registry()) {
    json kinds = json::array(), improper = json::array(), closed = json::array();
    for (auto k : s.kinds) kinds.push_back(std::string(to_string(k)));
    for (auto k : s.improper) improper.push_back(std::string(to_string(k)));
    for (auto k : s.closed_kinds) closed.push_back(std::string(to_string(k)));
    json refs = json::object();
    for (const auto& [k, r] : s.reference) {
      const char* form = r.form == Form::Normalized ? "normalized" : r.form == Form::Unnormalized ? "unnormalized" : "proportional";
      refs[std::string(to_string(k))] = {{"formula", r.formula}, {"form", form}, {"matches_metric", r.matches_metric}, {"note", r.note}};
    }
    json norms = json::object();
    for (const auto& [k, z] : s.normalization) norms[std::string(to_string(k))] = z;
    const auto cf = closed_form(s.id);
    json entry{{"id", s.id},
               {"description", s.description},
               {"group", s.group},
               {"coords", s.coords},
               {"dim", s.dim()},
               {"region", region_description(s.region)},
               {"metric_kinds", kinds},
               {"default_metric", std::string(to_string(s.default_kind))},
               {"improper", improper},
               {"unresolved", s.unresolved},
               {"closed_form", cf && !s.closed_kinds.empty() ? json(cf->formula) : json(nullptr)},
               {"closed_form_metrics", closed},
               {"references", refs},
               {"normalizations", norms},
               {"measurement_axis", s.measurement_axis},
               {"notes", s.notes}};
    if (s.family) {
      json params = json::array();
      for (const auto& p : s.family->parameters()) params.push_back(p.name);
      entry["family"] = {{"hilbert_dim", s.family->dim()}, {"parameters", params}};
    }
    arr.push_back(entry);
  }
  return json{{"scenarios", arr}}.dump(2);
}

}  // namespace mmtherm

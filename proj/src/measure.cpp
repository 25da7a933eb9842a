// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "mmtherm/errors.hpp"

namespace mmtherm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector vec1(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

Vector vec2(int axis, double x, double y) {
  Vector v(2);
  v(axis) = x;
  v(1 - axis) = y;
  return v;
}

Vector insert_coord(const Vector& rest, int axis, double value) {
  Vector v(rest.size() + 1);
  for (Eigen::Index i = 0, j = 0; i < v.size(); ++i) v(i) = (i == axis) ? value : rest(j++);
  return v;
}

double implicit_min_eig(const Implicit& r, const Vector& theta) { return min_eigenvalue((*r.family)(theta)); }

// Golden-section maximization of a concave function on [lo, hi].
std::pair<double, double> golden_max(const std::function<double(double)>& g, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int i = 0; i < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, g(x)};
}

// Boundary of {g ≥ level} between an inside point and an outside limit.
double bisect_boundary(const std::function<double(double)>& g, double level, double inside, double outside) {
  if (g(outside) >= level) return outside;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    (g(mid) >= level ? inside : outside) = mid;
  }
  return inside;
}

Interval implicit_line(const std::function<double(double)>& g, double level, double lo, double hi) {
  const auto [x, gx] = golden_max(g, lo, hi);
  if (gx < level) return {x, x};
  return {bisect_boundary(g, level, x, lo), bisect_boundary(g, level, x, hi)};
}

double slice_max_eig(const Implicit& r, int axis, double x) {
  const int o = 1 - axis;
  const auto& side = r.bounds.sides[static_cast<std::size_t>(o)];
  auto g = [&](double y) { return implicit_min_eig(r, vec2(axis, x, y)); };
  return golden_max(g, side.a, side.b).second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Regions

int region_dim(const Region& r) {
  return std::visit(overloaded{[](const Interval&) { return 1; }, [](const Triangle&) { return 2; },
                               [](const Ellipse&) { return 2; },
                               [](const Box& b) { return static_cast<int>(b.sides.size()); },
                               [](const Ball& b) { return b.dim; },
                               [](const Implicit& i) { return static_cast<int>(i.family->param_count()); }},
                    r);
}

std::string region_description(const Region& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  std::visit(overloaded{[&](const Interval& i) { os << "interval [" << i.a << ", " << i.b << "]"; },
                        [&](const Triangle& t) {
                          os << "triangle";
                          for (const auto& v : t.vertices) os << " (" << v(0) << ", " << v(1) << ")";
                        },
                        [&](const Ellipse& e) {
                          os << "ellipse center (" << e.center(0) << ", " << e.center(1) << ") shape [["
                             << e.shape(0, 0) << ", " << e.shape(0, 1) << "], [" << e.shape(1, 0) << ", "
                             << e.shape(1, 1) << "]]";
                        },
                        [&](const Box& b) {
                          os << "box";
                          for (const auto& s : b.sides) os << " [" << s.a << ", " << s.b << "]";
                        },
                        [&](const Ball& b) { os << "ball dim " << b.dim << " radius " << b.radius; },
                        [&](const Implicit& i) {
                          os << "implicit feasible set in box";
                          for (const auto& s : i.bounds.sides) os << " [" << s.a << ", " << s.b << "]";
                        }},
             r);
  return os.str();
}

Box bounding_box(const Region& r) {
  return std::visit(
      overloaded{[](const Interval& i) { return Box{{i}}; },
                 [](const Triangle& t) {
                   Box b{{Interval{t.vertices[0](0), t.vertices[0](0)}, Interval{t.vertices[0](1), t.vertices[0](1)}}};
                   for (const auto& v : t.vertices)
                     for (int k = 0; k < 2; ++k) {
                       b.sides[static_cast<std::size_t>(k)].a = std::min(b.sides[static_cast<std::size_t>(k)].a, v(k));
                       b.sides[static_cast<std::size_t>(k)].b = std::max(b.sides[static_cast<std::size_t>(k)].b, v(k));
                     }
                   return b;
                 },
                 [](const Ellipse& e) {
                   const Eigen::Matrix2d inv = e.shape.inverse();
                   Box b;
                   for (int k = 0; k < 2; ++k) {
                     const double h = std::sqrt(inv(k, k));
                     b.sides.push_back({e.center(k) - h, e.center(k) + h});
                   }
                   return b;
                 },
                 [](const Box& b) { return b; },
                 [](const Ball& b) {
                   return Box{std::vector<Interval>(static_cast<std::size_t>(b.dim), Interval{-b.radius, b.radius})};
                 },
                 [](const Implicit& i) { return i.bounds; }},
      r);
}

bool contains(const Region& r, const Vector& theta) {
  if (theta.size() != region_dim(r)) throw DomainError("contains: dimension mismatch");
  return std::visit(overloaded{[&](const Interval& i) { return i.contains(theta(0)); },
                               [&](const Triangle& t) {
                                 auto cross = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                                 const Eigen::Vector2d& p) {
                                   return (b(0) - a(0)) * (p(1) - a(1)) - (b(1) - a(1)) * (p(0) - a(0));
                                 };
                                 const Eigen::Vector2d p(theta(0), theta(1));
                                 const double area = cross(t.vertices[0], t.vertices[1], t.vertices[2]);
                                 const double tol = 1e-14 * std::abs(area);
                                 for (int k = 0; k < 3; ++k) {
                                   const double c = cross(t.vertices[static_cast<std::size_t>(k)],
                                                          t.vertices[static_cast<std::size_t>((k + 1) % 3)], p);
                                   if (c * (area > 0 ? 1 : -1) < -tol) return false;
                                 }
                                 return true;
                               },
                               [&](const Ellipse& e) {
                                 const Eigen::Vector2d d(theta(0) - e.center(0), theta(1) - e.center(1));
                                 return d.dot(e.shape * d) <= 1.0 + 1e-14;
                               },
                               [&](const Box& b) {
                                 for (std::size_t k = 0; k < b.sides.size(); ++k)
                                   if (!b.sides[k].contains(theta(static_cast<Eigen::Index>(k)))) return false;
                                 return true;
                               },
                               [&](const Ball& b) { return theta.norm() <= b.radius * (1 + 1e-15); },
                               [&](const Implicit& i) {
                                 for (std::size_t k = 0; k < i.bounds.sides.size(); ++k)
                                   if (!i.bounds.sides[k].contains(theta(static_cast<Eigen::Index>(k)))) return false;
                                 return implicit_min_eig(i, theta) >= -i.tol;
                               }},
                    r);
}

Interval resolve_interval(const Implicit& region) {
  if (region.family->param_count() != 1 || region.bounds.sides.size() != 1)
    throw DomainError("resolve_interval: implicit region is not one-dimensional");
  const auto& side = region.bounds.sides[0];
  auto g = [&](double t) { return implicit_min_eig(region, vec1(t)); };
  const auto iv = implicit_line(g, -region.tol, side.a, side.b);
  if (!(iv.b > iv.a)) throw DomainError("resolve_interval: feasible set has empty interior");
  return iv;
}

Interval axis_range(const Region& r, int axis) {
  if (axis < 0 || axis >= region_dim(r)) throw DomainError("axis_range: axis out of range");
  if (const auto* imp = std::get_if<Implicit>(&r)) {
    if (region_dim(r) == 1) return resolve_interval(*imp);
    if (region_dim(r) != 2) throw DomainError("axis_range: implicit regions above two dimensions are not supported");
    const auto& side = imp->bounds.sides[static_cast<std::size_t>(axis)];
    auto g = [&](double x) { return slice_max_eig(*imp, axis, x); };
    return implicit_line(g, -imp->tol, side.a, side.b);
  }
  return bounding_box(r).sides[static_cast<std::size_t>(axis)];
}

Interval slice(const Region& r, int axis, double x) {
  if (region_dim(r) != 2) throw DomainError("slice: region must be two-dimensional");
  if (axis != 0 && axis != 1) throw DomainError("slice: axis must be 0 or 1");
  const int o = 1 - axis;
  return std::visit(
      overloaded{[&](const Interval&) -> Interval { throw DomainError("slice: interval"); },
                 [&](const Triangle& t) {
                   double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                   for (int k = 0; k < 3; ++k) {
                     const auto& p = t.vertices[static_cast<std::size_t>(k)];
                     const auto& q = t.vertices[static_cast<std::size_t>((k + 1) % 3)];
                     const double pa = p(axis), qa = q(axis);
                     if (pa == qa) {
                       if (x == pa) {
                         lo = std::min({lo, p(o), q(o)});
                         hi = std::max({hi, p(o), q(o)});
                       }
                       continue;
                     }
                     if (x < std::min(pa, qa) || x > std::max(pa, qa)) continue;
                     const double y = p(o) + (q(o) - p(o)) * (x - pa) / (qa - pa);
                     lo = std::min(lo, y);
                     hi = std::max(hi, y);
                   }
                   if (lo > hi) return Interval{0.0, 0.0};
                   return Interval{lo, hi};
                 },
                 [&](const Ellipse& e) {
                   const double dx = x - e.center(axis);
                   const double aoo = e.shape(o, o), aao = e.shape(axis, o), aaa = e.shape(axis, axis);
                   const double disc = aao * aao * dx * dx - aoo * (aaa * dx * dx - 1.0);
                   if (disc <= 0) return Interval{e.center(o) - aao * dx / aoo, e.center(o) - aao * dx / aoo};
                   const double s = std::sqrt(disc);
                   return Interval{e.center(o) + (-aao * dx - s) / aoo, e.center(o) + (-aao * dx + s) / aoo};
                 },
                 [&](const Box& b) { return b.sides[static_cast<std::size_t>(o)]; },
                 [&](const Ball& b) {
                   const double h = std::sqrt(std::max(0.0, b.radius * b.radius - x * x));
                   return Interval{-h, h};
                 },
                 [&](const Implicit& imp) {
                   const auto& side = imp.bounds.sides[static_cast<std::size_t>(o)];
                   auto g = [&](double y) { return implicit_min_eig(imp, vec2(axis, x, y)); };
                   return implicit_line(g, -imp.tol, side.a, side.b);
                 }},
      r);
}

std::vector<double> slice_breakpoints(const Region& r, int axis) {
  std::vector<double> out;
  if (const auto* t = std::get_if<Triangle>(&r)) {
    const auto range = axis_range(r, axis);
    for (const auto& v : t->vertices)
      if (v(axis) > range.a && v(axis) < range.b) out.push_back(v(axis));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

double sphere_area(int k) {
  if (k < 1) throw DomainError("sphere_area: dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
}

// ---------------------------------------------------------------------------
// Integration

IntegrationOptions IntegrationOptions::with_tol(double tol) {
  IntegrationOptions o;
  o.outer.tol = tol;
  o.inner.tol = std::min(1e-12, tol * 1e-2);
  return o;
}

namespace {

// A tanh-sinh rule that fails on [a, b] usually meets structure much finer
// than b − a next to one end: a pole just outside the interval, or a vertex
// where the slice integrand changes power law below the endpoint guard. The
// integral is then retried on segments refined geometrically toward both
// ends. A segment that still diverges at a true endpoint rethrows.
//
// Slices that are short compared with `extent` sit at a vertex or tip of the
// region, where the matrix is close to rank deficient and eigenvalue rounding
// makes the integrand noisy. A stalled estimate is kept, before any retry,
// when its level-to-level change is below 1e-2 for those and 1e-6 otherwise.
IntegrationResult robust_integral(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& q, double extent = 0.0) {
  const double rel = (b - a) < 1e-3 * extent ? 1e-2 : 1e-6;
  IntegrationResult whole;
  bool diverged = false;
  try {
    const auto r = tanh_sinh(f, a, b, q);
    return {r.value, r.error, r.evaluations};
  } catch (const QuadratureError& e) {
    whole = {e.estimate, e.error, 0};
  } catch (const DivergenceError&) {
    diverged = true;
  }
  if (!diverged && std::isfinite(whole.value) && whole.error <= rel * std::abs(whole.value)) return whole;
  std::vector<double> cuts{a, b};
  const double len = b - a;
  for (int k = 1; k <= 12; ++k) {
    cuts.push_back(a + len * std::pow(10.0, -k));
    cuts.push_back(b - len * std::pow(10.0, -k));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  IntegrationResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    try {
      const auto r = tanh_sinh(f, cuts[i], cuts[i + 1], q);
      total.value += r.value;
      total.error += r.error;
      total.evaluations += r.evaluations;
    } catch (const QuadratureError& e) {
      total.value += e.estimate;
      total.error += e.error;
    }
  }
  if (std::isfinite(total.value) && total.error <= std::max(rel * std::abs(total.value), q.abs_tol)) return total;
  throw QuadratureError("integral did not converge on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                        total.value, total.error);
}

IntegrationResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                               const std::vector<double>& breaks, const QuadratureOptions& q) {
  IntegrationResult out;
  double lo = a;
  std::vector<double> ends;
  for (double x : breaks)
    if (x > a && x < b) ends.push_back(x);
  ends.push_back(b);
  for (double hi : ends) {
    const auto r = robust_integral(f, lo, hi, q);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    lo = hi;
  }
  return out;
}

double inner_integral(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& q,
                      std::size_t* evals = nullptr, double extent = 0.0) {
  const auto r = robust_integral(f, a, b, q, extent);
  if (evals) *evals += r.evaluations;
  return r.value;
}

IntegrationResult integrate_2d(const DensityFn& f, const Region& r, const IntegrationOptions& opts) {
  constexpr int outer_axis = 1;
  const auto range = axis_range(r, outer_axis);
  const double region_extent = std::max(axis_range(r, 0).b - axis_range(r, 0).a, range.b - range.a);
  std::size_t evals = 0;
  auto inner = [&](double y) {
    const auto s = slice(r, outer_axis, y);
    if (!(s.b > s.a)) return 0.0;
    return inner_integral([&](double x) { return f(vec2(outer_axis, y, x)); }, s.a, s.b, opts.inner, &evals,
                          region_extent);
  };
  auto out = integrate_1d(inner, range.a, range.b, slice_breakpoints(r, outer_axis), opts.outer);
  out.evaluations = evals;
  return out;
}

IntegrationResult integrate_box(const DensityFn& f, const Box& box, const IntegrationOptions& opts) {
  const auto d = static_cast<Eigen::Index>(box.sides.size());
  std::size_t evals = 0;
  Vector point(d);
  std::function<double(Eigen::Index)> nest = [&](Eigen::Index level) -> double {
    const auto& side = box.sides[static_cast<std::size_t>(level)];
    const auto& q = level == 0 ? opts.outer : opts.inner;
    const auto res = robust_integral(
        [&](double x) {
          point(level) = x;
          if (level + 1 == d) {
            ++evals;
            return f(point);
          }
          return nest(level + 1);
        },
        side.a, side.b, q);
    return res.value;
  };
  IntegrationResult out;
  out.value = nest(0);
  out.evaluations = evals;
  return out;
}

// Radial weight at distance r on a ball, read off along the first axis.
double radial(const DensityFn& f, int dim, double r) {
  Vector v = Vector::Zero(dim);
  v(0) = r;
  return f(v);
}

IntegrationResult integrate_ball(const DensityFn& f, const Ball& b, const IntegrationOptions& opts) {
  const double s = sphere_area(b.dim);
  return robust_integral([&](double r) { return s * radial(f, b.dim, r) * std::pow(r, b.dim - 1); }, 0.0, b.radius,
                         opts.outer);
}

// Marginal of a radial density on a ball along one axis:
// S_{d−2} ∫₀^{√(R²−x²)} w(√(x²+ρ²)) ρ^{d−2} dρ.
double ball_axis_marginal(const DensityFn& f, const Ball& b, double x, const QuadratureOptions& q) {
  if (b.dim == 1) return radial(f, 1, std::abs(x));
  const double top = std::sqrt(std::max(0.0, b.radius * b.radius - x * x));
  if (top <= 0.0) return 0.0;
  const double s = sphere_area(b.dim - 1);
  return inner_integral(
      [&](double rho) { return s * radial(f, b.dim, std::hypot(x, rho)) * std::pow(rho, b.dim - 2); }, 0.0, top, q,
      nullptr, 2 * b.radius);
}

}  // namespace

IntegrationResult integrate_region(const DensityFn& f, const Region& r, const IntegrationOptions& opts) {
  return std::visit(
      overloaded{[&](const Interval& i) {
                   return integrate_1d([&](double x) { return f(vec1(x)); }, i.a, i.b, {}, opts.outer);
                 },
                 [&](const Triangle&) { return integrate_2d(f, r, opts); },
                 [&](const Ellipse&) { return integrate_2d(f, r, opts); },
                 [&](const Box& b) { return integrate_box(f, b, opts); },
                 [&](const Ball& b) { return integrate_ball(f, b, opts); },
                 [&](const Implicit& imp) {
                   const int d = region_dim(r);
                   if (d == 1) {
                     const auto iv = resolve_interval(imp);
                     return integrate_1d([&](double x) { return f(vec1(x)); }, iv.a, iv.b, {}, opts.outer);
                   }
                   if (d == 2) return integrate_2d(f, r, opts);
                   throw DomainError("integrate: implicit regions above two dimensions are not supported");
                 }},
      r);
}

double integrate(const DensityFn& f, const Region& r, double tol) {
  return integrate_region(f, r, IntegrationOptions::with_tol(tol)).value;
}

DensityFn memoize(DensityFn f) {
  struct Hash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const {
      std::size_t h = 1469598103934665603ULL;
      for (auto v : k) h = (h ^ std::hash<std::uint64_t>{}(v)) * 1099511628211ULL;
      return h;
    }
  };
  struct Cache {
    std::mutex mutex;
    std::unordered_map<std::vector<std::uint64_t>, double, Hash> values;
  };
  auto cache = std::make_shared<Cache>();
  return [f = std::move(f), cache](const Vector& theta) {
    std::vector<std::uint64_t> key(static_cast<std::size_t>(theta.size()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) std::memcpy(&key[static_cast<std::size_t>(i)], &theta(i), 8);
    {
      std::lock_guard lock(cache->mutex);
      if (auto it = cache->values.find(key); it != cache->values.end()) return it->second;
    }
    const double v = f(theta);
    std::lock_guard lock(cache->mutex);
    cache->values.emplace(std::move(key), v);
    return v;
  };
}

// ---------------------------------------------------------------------------
// Priors

Prior::Prior(Region region, DensityFn unnormalized, double z, std::vector<std::string> names)
    : region_(std::move(region)), unnormalized_(std::move(unnormalized)), z_(z), names_(std::move(names)) {
  if (!(z_ > 0.0) || !std::isfinite(z_)) throw DivergenceError("Prior: normalization must be positive and finite", z_);
  if (names_.empty())
    for (int k = 0; k < region_dim(region_); ++k) names_.push_back("theta" + std::to_string(k));
}

Prior Prior::with_rule(DiscreteRule rule) const {
  if (dim() != 1) throw DomainError("Prior::with_rule: only one-dimensional priors carry discrete rules");
  Prior p = *this;
  p.rule_ = std::move(rule);
  return p;
}

Prior Prior::with_breakpoints(std::vector<double> breaks) const {
  if (dim() != 1) throw DomainError("Prior::with_breakpoints: only one-dimensional priors carry breakpoints");
  Prior p = *this;
  p.breaks_ = std::move(breaks);
  return p;
}

Prior Prior::reweighted(std::function<double(const Vector&)> factor, double new_z) const {
  auto base = unnormalized_;
  Prior p(region_, [base, factor = std::move(factor)](const Vector& t) { return base(t) * factor(t); }, new_z, names_);
  p.rule_ = rule_;
  p.breaks_ = breaks_;
  return p;
}

double expectation(const Prior& prior, const std::function<double(const Vector&)>& g, const IntegrationOptions& opts) {
  if (const auto& rule = prior.rule()) {
    std::vector<double> terms(rule->nodes.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Vector x = vec1(rule->nodes[i]);
      terms[i] = rule->weights[i] * prior.density(x) * g(x);
    }
    return pairwise_sum(terms.data(), terms.size());
  }
  if (const auto* ball = std::get_if<Ball>(&prior.region()); ball && ball->dim > 1) {
    // Radial prior against a function of the first coordinate only.
    const Prior m = axis_marginal_prior(prior, 0, opts);
    return expectation(m, [&](const Vector& x) {
      Vector full = Vector::Zero(ball->dim);
      full(0) = x(0);
      return g(full);
    }, opts);
  }
  if (const auto* iv = std::get_if<Interval>(&prior.region()); iv && !prior.breakpoints().empty())
    return integrate_1d([&](double x) {
             const Vector t = vec1(x);
             return prior.density(t) * g(t);
           }, iv->a, iv->b, prior.breakpoints(), opts.outer).value;
  return integrate_region([&](const Vector& t) { return prior.density(t) * g(t); }, prior.region(), opts).value;
}

Prior normalize_prior(const DensityFn& volume_fn, const Region& region, double tol, std::vector<std::string> names) {
  double z = 0.0;
  try {
    z = integrate_region(volume_fn, region, IntegrationOptions::with_tol(tol)).value;
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string("improper prior: the volume element is not normalizable (") + e.what() + ")",
                          e.estimate);
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw DivergenceError("improper prior: normalization is not positive and finite", z);
  return Prior(region, volume_fn, z, std::move(names));
}

Prior axis_marginal_prior(const Prior& prior, int axis, const IntegrationOptions& opts) {
  const int d = prior.dim();
  if (axis < 0 || axis >= d) throw DomainError("axis_marginal_prior: axis out of range");
  if (d == 1) return prior;
  const std::string name = prior.names()[static_cast<std::size_t>(axis)];
  const Region& region = prior.region();
  const DensityFn f = prior.unnormalized_fn();
  const QuadratureOptions q = opts.inner;

  DensityFn density;
  Interval range;
  if (const auto* ball = std::get_if<Ball>(&region)) {
    const Ball b = *ball;
    range = {-b.radius, b.radius};
    density = [f, b, q](const Vector& x) { return ball_axis_marginal(f, b, x(0), q); };
  } else if (const auto* box = std::get_if<Box>(&region)) {
    Box rest;
    for (int k = 0; k < d; ++k)
      if (k != axis) rest.sides.push_back(box->sides[static_cast<std::size_t>(k)]);
    range = box->sides[static_cast<std::size_t>(axis)];
    IntegrationOptions inner_opts;
    inner_opts.outer = q;
    inner_opts.inner = q;
    density = [f, rest, axis, inner_opts](const Vector& x) {
      return integrate_region([&](const Vector& y) { return f(insert_coord(y, axis, x(0))); }, rest, inner_opts).value;
    };
  } else if (d == 2) {
    range = axis_range(region, axis);
    const double extent = std::max(range.b - range.a, axis_range(region, 1 - axis).b - axis_range(region, 1 - axis).a);
    density = [f, region, axis, q, extent](const Vector& x) {
      const auto s = slice(region, axis, x(0));
      if (!(s.b > s.a)) return 0.0;
      return inner_integral([&](double y) { return f(vec2(axis, x(0), y)); }, s.a, s.b, q, nullptr, extent);
    };
  } else {
    throw DomainError("axis_marginal_prior: unsupported region " + region_description(region));
  }
  Prior m(range, memoize(std::move(density)), prior.normalization(), {name});
  return m.with_breakpoints(slice_breakpoints(region, axis));
}

// ---------------------------------------------------------------------------
// Tabulated1D

Tabulated1D::Tabulated1D(double a, double b, std::vector<double> x, std::vector<double> density,
                         std::vector<double> weights, Grid grid)
    : a_(a), b_(b), x_(std::move(x)), p_(std::move(density)), w_(std::move(weights)), grid_(grid) {
  if (x_.size() < 2 || x_.size() != p_.size() || x_.size() != w_.size())
    throw DomainError("Tabulated1D: grid, density and weights must have equal length >= 2");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("Tabulated1D: grid must be strictly increasing");
  for (double& p : p_) {
    if (!std::isfinite(p)) throw DomainError("Tabulated1D: non-finite density value");
    if (p < 0) {
      if (p < -1e-10) throw DomainError("Tabulated1D: negative density value");
      p = 0.0;
    }
  }
  build_slopes();
}

std::pair<std::vector<double>, std::vector<double>> Tabulated1D::grid_nodes(double a, double b, std::size_t n,
                                                                             Grid grid) {
  if (n < 2) throw DomainError("Tabulated1D: grid needs at least two points");
  if (!(b > a)) throw DomainError("Tabulated1D: empty interval");
  std::vector<double> x(n), w(n);
  if (grid == Grid::CosineGauss) {
    const auto gl = gauss_legendre(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = 0.5 * std::numbers::pi * (1.0 + gl.nodes[i]);
      // 1 − cos φ = 2 sin²(φ/2) keeps full relative precision near a.
      const double s = std::sin(0.5 * phi);
      x[i] = a + (b - a) * s * s;
      w[i] = gl.weights[i] * 0.5 * std::numbers::pi * 0.5 * (b - a) * std::sin(phi);
    }
  } else {
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a + (static_cast<double>(i) + 0.5) * h;
      w[i] = h;
    }
  }
  return {x, w};
}

Tabulated1D Tabulated1D::from_function(const std::function<double(double)>& f, double a, double b, std::size_t n,
                                       Grid grid) {
  auto [x, w] = grid_nodes(a, b, n, grid);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = f(x[i]);
  return Tabulated1D(a, b, std::move(x), std::move(p), std::move(w), grid);
}

void Tabulated1D::build_slopes() {
  // Fritsch-Carlson monotone slopes with the weighted harmonic mean.
  const std::size_t n = x_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (p_[i + 1] - p_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) continue;
    const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
    slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0) return 0.0;
    if (d0 * d1 <= 0 && std::abs(s) > std::abs(3 * d0)) return 3 * d0;
    return s;
  };
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
  } else {
    slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
}

double Tabulated1D::operator()(double x) const {
  if (x <= x_.front()) return p_.front();
  if (x >= x_.back()) return p_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * p_[i] + (t3 - 2 * t2 + t) * h * slope_[i] + (-2 * t3 + 3 * t2) * p_[i + 1] +
                   (t3 - t2) * h * slope_[i + 1];
  return std::max(v, 0.0);
}

double Tabulated1D::integral() const {
  return integrate([](double) { return 1.0; });
}

double Tabulated1D::integrate(const std::function<double(double)>& g) const {
  std::vector<double> terms(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) terms[i] = w_[i] * p_[i] * g(x_[i]);
  return pairwise_sum(terms.data(), terms.size());
}

Tabulated1D Tabulated1D::normalized() const {
  const double z = integral();
  if (!(z > 0)) throw DomainError("Tabulated1D: cannot normalize a zero density");
  std::vector<double> p = p_;
  for (double& v : p) v /= z;
  return Tabulated1D(a_, b_, x_, std::move(p), w_, grid_);
}

Prior Tabulated1D::as_prior(std::string name) const {
  const auto self = std::make_shared<Tabulated1D>(*this);
  // Exact node values for the node rule; interpolation between nodes.
  auto exact = std::make_shared<std::map<double, double>>();
  for (std::size_t i = 0; i < x_.size(); ++i) (*exact)[x_[i]] = p_[i];
  Prior q(Interval{a_, b_},
          [self, exact](const Vector& t) {
            if (auto it = exact->find(t(0)); it != exact->end()) return it->second;
            return (*self)(t(0));
          },
          1.0, {std::move(name)});
  return q.with_rule({x_, w_});
}

namespace {

const char* grid_name(Tabulated1D::Grid g) { return g == Tabulated1D::Grid::CosineGauss ? "cosine-gauss" : "uniform-midpoint"; }

}  // namespace

std::string Tabulated1D::to_csv(const std::vector<std::string>& extra) const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# grid=" << grid_name(grid_) << "\n";
  os << "# n=" << x_.size() << "\n";
  os << "# a=" << a_ << "\n";
  os << "# b=" << b_ << "\n";
  for (const auto& line : extra) os << "# " << line << "\n";
  os << "x,density\n";
  for (std::size_t i = 0; i < x_.size(); ++i) os << x_[i] << "," << p_[i] << "\n";
  return os.str();
}

Tabulated1D Tabulated1D::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::map<std::string, std::string> meta;
  std::vector<double> x, p;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (!header) {
      if (line.rfind("x,density", 0) != 0) throw DomainError("Tabulated1D csv: expected header 'x,density'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("Tabulated1D csv: malformed row '" + line + "'");
    try {
      x.push_back(std::stod(line.substr(0, comma)));
      p.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("Tabulated1D csv: malformed row '" + line + "'");
    }
  }
  if (!header || x.size() < 2) throw DomainError("Tabulated1D csv: no data");
  const bool has_grid = meta.count("grid") && meta.count("a") && meta.count("b");
  if (has_grid) {
    const Grid grid = meta["grid"] == "cosine-gauss" ? Grid::CosineGauss : Grid::Uniform;
    const double a = std::stod(meta["a"]), b = std::stod(meta["b"]);
    auto [gx, gw] = grid_nodes(a, b, x.size(), grid);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(gx[i] - x[i]) > 1e-12 * (b - a)) throw DomainError("Tabulated1D csv: grid metadata does not match rows");
    return Tabulated1D(a, b, std::move(gx), std::move(p), std::move(gw), grid);
  }
  // No metadata: trapezoid weights on the rows as given.
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return Tabulated1D(x.front(), x.back(), std::move(x), std::move(p), std::move(w), Grid::Uniform);
}

Tabulated1D marginal(const Prior& prior, int axis, std::size_t grid_size, const IntegrationOptions& opts) {
  const Prior m = axis_marginal_prior(prior, axis, opts);
  const auto range = axis_range(m.region(), 0);
  return Tabulated1D::from_function([&](double x) { return m.density(vec1(x)); }, range.a, range.b, grid_size);
}

// ---------------------------------------------------------------------------
// Shrink limit

std::vector<double> default_shrink_sequence() {
  std::vector<double> r;
  for (int k = 1; k <= 6; ++k) r.push_back(1.0 - std::pow(10.0, -k));
  return r;
}

namespace {

// Neville extrapolation to t = 0; returns (value, |value − value without the finest point|).
std::pair<double, double> neville_at_zero(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t m = t.size();
  if (m == 1) return {v[0], std::numeric_limits<double>::infinity()};
  auto extrapolate = [&](std::size_t count) {
    std::vector<double> p(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count));
    for (std::size_t level = 1; level < count; ++level)
      for (std::size_t i = 0; i + level < count; ++i)
        p[i] = (t[i + level] * p[i] - t[i] * p[i + 1]) / (t[i + level] - t[i]);
    return p[0];
  };
  const double full = extrapolate(m);
  const double partial = extrapolate(m - 1);
  return {full, std::abs(full - partial)};
}

constexpr double kShrinkQuadratureTol = 1e-9;

IntegrationOptions shrink_options(const IntegrationOptions& base, double R) {
  // The weight is finite at the shrunken edge but varies on the scale 1 − R
  // relative to the slice, so the endpoint guard has to sit well inside that
  // scale. Slices near a vertex are short, which rules out an absolute guard.
  // The extrapolated marginal is only trusted to kShrinkResidualTol, so the
  // per-radius integrals need far less than the default 1e-12 inner tolerance.
  IntegrationOptions o = base;
  const double scale = 1e-4 * (1.0 - R);
  for (auto* q : {&o.outer, &o.inner}) {
    q->tol = std::max(q->tol, kShrinkQuadratureTol);
    q->guard_rel = std::min(q->guard_rel, scale);
    q->guard_abs = 0.0;
  }
  return o;
}

}  // namespace

ShrinkLimitResult shrink_limit_marginal(const DensityFn& volume_fn, const RegionFamily& region, int axis,
                                        std::vector<double> r_sequence, std::size_t grid,
                                        const IntegrationOptions& opts) {
  if (r_sequence.empty()) r_sequence = default_shrink_sequence();
  for (double R : r_sequence)
    if (!(R > 0.0 && R < 1.0)) throw DomainError("shrink_limit_marginal: radii must lie in (0, 1)");
  std::sort(r_sequence.begin(), r_sequence.end());

  const Region limit = region(1.0);
  const auto range = axis_range(limit, axis);
  const auto [xs, ws] = Tabulated1D::grid_nodes(range.a, range.b, grid, Tabulated1D::Grid::CosineGauss);

  ShrinkLimitResult out{Tabulated1D(range.a, range.b, xs, std::vector<double>(grid, 0.0), ws,
                                    Tabulated1D::Grid::CosineGauss),
                        0.0,
                        {},
                        {}};
  std::vector<std::vector<double>> ts(grid), vs(grid);

  auto run = [&](double R) {
    const Region reg = region(R);
    const auto o = shrink_options(opts, R);
    const double z = integrate_region(volume_fn, reg, o).value;
    if (!(z > 0) || !std::isfinite(z)) throw DivergenceError("shrink_limit_marginal: weight not normalizable at R", z);
    const Prior prior(reg, volume_fn, z);
    const Prior m = axis_marginal_prior(prior, axis, o);
    const auto r_range = axis_range(reg, axis);
    const double t = std::sqrt(1.0 - R);
    for (std::size_t i = 0; i < grid; ++i) {
      if (!(xs[i] > r_range.a && xs[i] < r_range.b)) continue;
      ts[i].push_back(t);
      vs[i].push_back(m.density(vec1(xs[i])));
    }
    out.radii.push_back(R);
    out.normalizations.push_back(z);
  };

  for (double R : r_sequence) run(R);
  int k = static_cast<int>(std::round(-std::log10(1.0 - r_sequence.back())));
  auto min_count = [&] {
    std::size_t c = std::numeric_limits<std::size_t>::max();
    for (const auto& t : ts) c = std::min(c, t.size());
    return c;
  };
  while (min_count() < 3 && k < 11) {
    ++k;
    run(1.0 - std::pow(10.0, -k));
  }
  if (min_count() < 2) throw QuadratureError("shrink_limit_marginal: grid nodes too close to the edge", 0, 0);

  std::vector<double> values(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    // Neville wants the points ordered; ts is descending in t already.
    const auto [v, res] = neville_at_zero(ts[i], vs[i]);
    values[i] = std::max(v, 0.0);
    out.residual = std::max(out.residual, res / std::max(1.0, std::abs(v)));
  }
  out.marginal = Tabulated1D(range.a, range.b, xs, std::move(values), ws, Tabulated1D::Grid::CosineGauss);
  if (out.residual > kShrinkResidualTol)
    throw QuadratureError("shrink_limit_marginal: extrapolation residual " + std::to_string(out.residual) +
                              " above tolerance",
                          0, out.residual);
  return out;
}

ShrinkLimitResult shrink_limit_marginal(const DensityFn& volume_fn, const Ball& ball, int axis,
                                        std::vector<double> r_sequence, std::size_t grid,
                                        const IntegrationOptions& opts) {
  const int dim = ball.dim;
  const double radius = ball.radius;
  // Radii are relative to the ball's own radius.
  DensityFn scaled = [volume_fn, radius](const Vector& t) { return volume_fn(t * radius) ; };
  auto res = shrink_limit_marginal(
      radius == 1.0 ? volume_fn : scaled, [dim](double R) -> Region { return Ball{dim, R}; }, axis,
      std::move(r_sequence), grid, opts);
  if (radius != 1.0) {
    std::vector<double> x = res.marginal.x(), p = res.marginal.density(), w = res.marginal.weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] *= radius;
      p[i] /= radius;
      w[i] *= radius;
    }
    res.marginal = Tabulated1D(-radius, radius, x, p, w, Tabulated1D::Grid::CosineGauss);
  }
  return res;
}

Prior conditional_slice_prior(const DensityFn& volume_fn, const Region& region, int fixed_axis, double value,
                              double tol) {
  const int d = region_dim(region);
  if (d < 2) throw DomainError("conditional_slice_prior: region must have at least two dimensions");
  if (fixed_axis < 0 || fixed_axis >= d) throw DomainError("conditional_slice_prior: axis out of range");
  DensityFn sliced = [volume_fn, fixed_axis, value](const Vector& rest) {
    return volume_fn(insert_coord(rest, fixed_axis, value));
  };
  Region lower;
  if (const auto* ball = std::get_if<Ball>(&region)) {
    if (std::abs(value) >= ball->radius) throw DomainError("conditional_slice_prior: slice lies outside the ball");
    // Distance from the slice centre is still radial, so the slice is a smaller ball.
    lower = Ball{d - 1, std::sqrt(ball->radius * ball->radius - value * value)};
  } else if (const auto* box = std::get_if<Box>(&region)) {
    const auto& side = box->sides[static_cast<std::size_t>(fixed_axis)];
    if (!(value > side.a && value < side.b)) throw DomainError("conditional_slice_prior: slice lies outside the box");
    Box rest;
    for (int k = 0; k < d; ++k)
      if (k != fixed_axis) rest.sides.push_back(box->sides[static_cast<std::size_t>(k)]);
    lower = rest;
  } else if (d == 2) {
    const auto s = slice(region, fixed_axis, value);
    if (!(s.b > s.a)) throw DomainError("conditional_slice_prior: slice has empty interior");
    lower = s;
  } else {
    throw DomainError("conditional_slice_prior: unsupported region " + region_description(region));
  }
  return normalize_prior(sliced, lower, tol);
}

// ---------------------------------------------------------------------------

DivergenceProbe probe_divergence(const std::function<double(double)>& f, double a, double b, int decades) {
  DivergenceProbe probe;
  const double w = b - a;
  for (int k = 1; k <= decades; ++k) {
    const double eps = w * std::pow(10.0, -k);
    QuadratureOptions q;
    q.tol = 1e-12;
    q.guard_rel = std::min(q.guard_rel, 1e-4 * eps / w);
    q.guard_abs = std::min(q.guard_abs, 1e-4 * eps);
    probe.eps.push_back(eps);
    probe.estimates.push_back(robust_integral(f, a + eps, b - eps, q).value);
  }
  const std::size_t n = probe.estimates.size();
  if (n >= 3) {
    const double d1 = probe.estimates[n - 2] - probe.estimates[n - 3];
    const double d2 = probe.estimates[n - 1] - probe.estimates[n - 2];
    probe.tail_ratio = d1 != 0.0 ? d2 / d1 : 0.0;
    // A convergent power-law tail d^(−s), s < 1, shrinks each decade by 10^(s−1).
    probe.divergent = probe.tail_ratio >= 0.9;
  }
  return probe;
}

}  // namespace mmtherm

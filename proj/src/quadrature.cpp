// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "mmtherm/errors.hpp"

namespace mmtherm {

namespace {

constexpr double kTMax = 4.0;
constexpr int kTableLevels = 16;

// Abscissae for the unit half-width interval: distance to the nearer endpoint
// and weight, for t > 0. Level 0 holds t = 1..4; level k holds the odd
// multiples of 2^-k.
struct NodeTable {
  std::vector<std::vector<double>> distance;
  std::vector<std::vector<double>> weight;
};

void fill_node(double t, std::vector<double>& d, std::vector<double>& w) {
  const double u = 0.5 * std::numbers::pi * std::sinh(t);
  const double cu = std::cosh(u);
  d.push_back(2.0 / (std::exp(2.0 * u) + 1.0));
  w.push_back(0.5 * std::numbers::pi * std::cosh(t) / (cu * cu));
}

const NodeTable& node_table() {
  static const NodeTable table = [] {
    NodeTable t;
    t.distance.resize(kTableLevels + 1);
    t.weight.resize(kTableLevels + 1);
    for (int j = 1; j <= static_cast<int>(kTMax); ++j) fill_node(j, t.distance[0], t.weight[0]);
    for (int k = 1; k <= kTableLevels; ++k) {
      const double h = std::ldexp(1.0, -k);
      for (long i = 0;; ++i) {
        const double tt = (2 * i + 1) * h;
        if (tt > kTMax) break;
        fill_node(tt, t.distance[static_cast<std::size_t>(k)], t.weight[static_cast<std::size_t>(k)]);
      }
    }
    return t;
  }();
  return table;
}

// Value model for nodes inside the endpoint guard.
class EndpointModel {
 public:
  EndpointModel(const std::function<double(double)>& f, double endpoint, double inward, double delta)
      : delta_(delta) {
    f1_ = f(endpoint + inward * delta);
    f2_ = f(endpoint + inward * 2 * delta);
    if (!std::isfinite(f1_) || !std::isfinite(f2_)) throw QuadratureError("tanh_sinh: non-finite integrand near endpoint", 0, 0);
    if (f1_ != 0.0 && f2_ != 0.0 && (f1_ > 0) == (f2_ > 0)) {
      exponent_ = std::log2(f1_ / f2_);
      power_ = true;
    }
  }

  double exponent() const { return exponent_; }
  bool divergent() const { return power_ && exponent_ >= 0.999; }

  double operator()(double d) const {
    if (power_) return f1_ * std::pow(delta_ / d, exponent_);
    return f1_ + (f2_ - f1_) * (d - delta_) / delta_;
  }

 private:
  double delta_;
  double f1_ = 0.0, f2_ = 0.0;
  double exponent_ = 0.0;
  bool power_ = false;
};

}  // namespace

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& opts) {
  if (!(b > a)) {
    if (a == b) return {};
    throw DomainError("tanh_sinh: empty interval");
  }
  if (opts.max_level > kTableLevels) throw DomainError("tanh_sinh: max_level above " + std::to_string(kTableLevels));
  const auto& table = node_table();
  const double half = 0.5 * (b - a);
  const double mid = a + half;
  const double delta = std::min(std::max(opts.guard_rel * (b - a), opts.guard_abs), (b - a) / 8);

  QuadratureResult res;
  std::optional<EndpointModel> left, right;
  auto eval_left = [&](double d) {
    if (d < delta) {
      if (!left) {
        left.emplace(f, a, 1.0, delta);
        res.evaluations += 2;
        if (left->divergent())
          throw DivergenceError("tanh_sinh: non-integrable endpoint singularity at " + std::to_string(a) +
                                    " (exponent " + std::to_string(left->exponent()) + ")",
                                std::numeric_limits<double>::infinity());
      }
      return (*left)(d);
    }
    ++res.evaluations;
    return f(a + d);
  };
  auto eval_right = [&](double d) {
    if (d < delta) {
      if (!right) {
        right.emplace(f, b, -1.0, delta);
        res.evaluations += 2;
        if (right->divergent())
          throw DivergenceError("tanh_sinh: non-integrable endpoint singularity at " + std::to_string(b) +
                                    " (exponent " + std::to_string(right->exponent()) + ")",
                                std::numeric_limits<double>::infinity());
      }
      return (*right)(d);
    }
    ++res.evaluations;
    return f(b - d);
  };

  std::vector<double> terms, abs_terms;
  double sum = 0.0, l1 = 0.0;
  auto add_level = [&](int k) {
    terms.clear();
    abs_terms.clear();
    const auto& ds = table.distance[static_cast<std::size_t>(k)];
    const auto& ws = table.weight[static_cast<std::size_t>(k)];
    if (k == 0) {
      ++res.evaluations;
      const double fc = f(mid);
      terms.push_back(0.5 * std::numbers::pi * fc);
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double d = half * ds[i];
      const double w = ws[i];
      terms.push_back(w * eval_left(d));
      terms.push_back(w * eval_right(d));
    }
    for (double t : terms) {
      if (std::isnan(t)) throw QuadratureError("tanh_sinh: integrand returned NaN", sum, 0);
      abs_terms.push_back(std::abs(t));
    }
    sum += pairwise_sum(terms.data(), terms.size());
    l1 += pairwise_sum(abs_terms.data(), abs_terms.size());
  };

  add_level(0);
  double prev = half * sum;
  for (int k = 1; k <= opts.max_level; ++k) {
    add_level(k);
    const double h = std::ldexp(1.0, -k);
    const double cur = half * h * sum;
    res.value = cur;
    res.error = std::abs(cur - prev);
    res.l1 = half * h * l1;
    res.level = k;
    if (!std::isfinite(cur)) throw QuadratureError("tanh_sinh: non-finite estimate", cur, res.error);
    if (k >= opts.min_level && res.error <= opts.tol * res.l1 + opts.abs_tol) {
      res.left_exponent = left ? left->exponent() : 0.0;
      res.right_exponent = right ? right->exponent() : 0.0;
      return res;
    }
    prev = cur;
  }
  throw QuadratureError("tanh_sinh: no convergence after level " + std::to_string(opts.max_level) + " on [" +
                            std::to_string(a) + ", " + std::to_string(b) + "]",
                        res.value, res.error);
}

GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: n must be positive");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = gl.weights[n - 1 - i] = w;
  }
  return gl;
}

}  // namespace mmtherm

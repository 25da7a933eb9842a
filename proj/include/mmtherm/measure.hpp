// SPDX-License-Identifier: Apache-2.0
//
// Feasibility regions, integration over them, normalized priors, marginals
// and the shrunken-domain limit for improper weights.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmtherm/matrixcore.hpp"
#include "mmtherm/quadrature.hpp"

namespace mmtherm {

using DensityFn = std::function<double(const Vector&)>;

struct Interval {
  double a = 0.0, b = 1.0;
  double width() const { return b - a; }
  bool contains(double x) const { return x >= a && x <= b; }
};

/// Vertices in (θ₀, θ₁).
struct Triangle {
  std::array<Eigen::Vector2d, 3> vertices;
};

/// {θ : (θ−c)ᵀ A (θ−c) ≤ 1} with A symmetric positive definite.
struct Ellipse {
  Eigen::Matrix2d shape = Eigen::Matrix2d::Identity();
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
};

struct Box {
  std::vector<Interval> sides;
};

/// Centered ball. Densities on a ball are taken to be radial.
struct Ball {
  int dim = 3;
  double radius = 1.0;
};

/// Feasible set of an affine family inside a bounding box. The feasible set
/// is convex (λ_min(ρ(θ)) is concave), so slices are single intervals found
/// by bisection.
struct Implicit {
  std::shared_ptr<const AffineFamily> family;
  Box bounds;
  double tol = 0.0;  // eigenvalue floor defining feasibility
};

using Region = std::variant<Interval, Triangle, Ellipse, Box, Ball, Implicit>;

int region_dim(const Region& r);
std::string region_description(const Region& r);
Box bounding_box(const Region& r);
bool contains(const Region& r, const Vector& theta);

/// Range of coordinate `axis` over the region.
Interval axis_range(const Region& r, int axis);

/// For a two-dimensional region: the interval of the other coordinate when
/// coordinate `axis` is fixed at x.
Interval slice(const Region& r, int axis, double x);

/// Interior breakpoints of the slice bounds along `axis` (triangle vertices).
std::vector<double> slice_breakpoints(const Region& r, int axis);

/// Implicit 1D regions resolve to their interval.
Interval resolve_interval(const Implicit& region);

/// Unit sphere area S_{k−1} = 2π^{k/2}/Γ(k/2) in ℝᵏ.
double sphere_area(int k);

// ---------------------------------------------------------------------------

struct IntegrationOptions {
  QuadratureOptions outer{};
  QuadratureOptions inner{.tol = 1e-12};

  static IntegrationOptions with_tol(double tol);
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

IntegrationResult integrate_region(const DensityFn& f, const Region& r, const IntegrationOptions& opts = {});
double integrate(const DensityFn& f, const Region& r, double tol = 1e-10);

/// Thread-safe memoization keyed on the exact bit pattern of the point.
DensityFn memoize(DensityFn f);

// ---------------------------------------------------------------------------

/// Discrete quadrature rule baked into a tabulated prior.
struct DiscreteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

class Prior {
 public:
  Prior(Region region, DensityFn unnormalized, double z, std::vector<std::string> names = {});

  double density(const Vector& theta) const { return unnormalized_(theta) / z_; }
  double unnormalized(const Vector& theta) const { return unnormalized_(theta); }
  double normalization() const { return z_; }
  const Region& region() const { return region_; }
  int dim() const { return region_dim(region_); }
  const std::vector<std::string>& names() const { return names_; }
  const DensityFn& unnormalized_fn() const { return unnormalized_; }

  /// One-dimensional priors may carry their own node/weight rule; expectations then use it.
  const std::optional<DiscreteRule>& rule() const { return rule_; }
  Prior with_rule(DiscreteRule rule) const;

  /// Interior points where a one-dimensional density has kinks; integration splits there.
  const std::vector<double>& breakpoints() const { return breaks_; }
  Prior with_breakpoints(std::vector<double> breaks) const;

  /// Same region and normalization reference with the density multiplied pointwise.
  Prior reweighted(std::function<double(const Vector&)> factor, double new_z) const;

 private:
  Region region_;
  DensityFn unnormalized_;
  double z_;
  std::vector<std::string> names_;
  std::optional<DiscreteRule> rule_;
  std::vector<double> breaks_;
};

/// ∫ prior·g over the prior's region.
double expectation(const Prior& prior, const std::function<double(const Vector&)>& g,
                   const IntegrationOptions& opts = {});

/// Throws DivergenceError for improper weights.
Prior normalize_prior(const DensityFn& volume_fn, const Region& region, double tol = 1e-10,
                      std::vector<std::string> names = {});

/// Lower-dimensional prior whose density is the marginal along `axis`,
/// evaluated on demand by slice quadrature (memoized).
Prior axis_marginal_prior(const Prior& prior, int axis, const IntegrationOptions& opts = {});

// ---------------------------------------------------------------------------

/// Monotone-cubic interpolated density on [a, b] with an attached quadrature rule.
///
/// The default grid places n Gauss-Legendre nodes in φ ∈ (0, π) and maps them
/// by x = a + (b−a)(1−cos φ)/2. Inverse-square-root endpoint behaviour then
/// becomes smooth in φ, so Σ wᵢ pᵢ converges spectrally.
class Tabulated1D {
 public:
  enum class Grid { CosineGauss, Uniform };

  Tabulated1D(double a, double b, std::vector<double> x, std::vector<double> density, std::vector<double> weights,
              Grid grid);

  static Tabulated1D from_function(const std::function<double(double)>& f, double a, double b, std::size_t n = 201,
                                   Grid grid = Grid::CosineGauss);
  static std::pair<std::vector<double>, std::vector<double>> grid_nodes(double a, double b, std::size_t n, Grid grid);

  double operator()(double x) const;
  double integral() const;
  double integrate(const std::function<double(double)>& g) const;

  double a() const { return a_; }
  double b() const { return b_; }
  Grid grid() const { return grid_; }
  std::size_t size() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& density() const { return p_; }
  const std::vector<double>& weights() const { return w_; }

  /// Divide the density by its integral.
  Tabulated1D normalized() const;

  Prior as_prior(std::string name = "x") const;

  /// Header `x,density`, 17 significant digits; `#` lines carry grid metadata and `extra` comments.
  std::string to_csv(const std::vector<std::string>& extra = {}) const;
  static Tabulated1D from_csv(const std::string& text);

 private:
  void build_slopes();

  double a_, b_;
  std::vector<double> x_, p_, w_, slope_;
  Grid grid_;
};

/// Marginal density along `axis`, normalized by the prior's Z.
Tabulated1D marginal(const Prior& prior, int axis, std::size_t grid_size = 201, const IntegrationOptions& opts = {});

// ---------------------------------------------------------------------------

using RegionFamily = std::function<Region(double R)>;

struct ShrinkLimitResult {
  Tabulated1D marginal;
  double residual = 0.0;          // max over nodes of the last extrapolation correction
  std::vector<double> radii;      // R values used
  std::vector<double> normalizations;  // Z(R)
};

inline constexpr double kShrinkResidualTol = 1e-4;

/// Default R sequence 1 − 10^(−k), k = 1..6.
std::vector<double> default_shrink_sequence();

/// Normalizes `volume_fn` on each region(R), marginalizes along `axis`, and
/// extrapolates each grid value to R = 1 in t = (1−R)^{1/2} by Neville's
/// scheme. Grid nodes outside region(R) skip that R; when a node has fewer
/// than three usable radii the sequence is extended with k = 7..11.
/// Throws QuadratureError when the residual exceeds kShrinkResidualTol.
ShrinkLimitResult shrink_limit_marginal(const DensityFn& volume_fn, const RegionFamily& region, int axis,
                                        std::vector<double> r_sequence = {}, std::size_t grid = 201,
                                        const IntegrationOptions& opts = {});

ShrinkLimitResult shrink_limit_marginal(const DensityFn& volume_fn, const Ball& ball, int axis,
                                        std::vector<double> r_sequence = {}, std::size_t grid = 201,
                                        const IntegrationOptions& opts = {});

/// Normalized prior on the slice θ[fixed_axis] = value.
Prior conditional_slice_prior(const DensityFn& volume_fn, const Region& region, int fixed_axis, double value,
                              double tol = 1e-10);

// ---------------------------------------------------------------------------

/// Refinement study of ∫ f over [a+ε, b−ε] as ε → 0.
struct DivergenceProbe {
  std::vector<double> eps;
  std::vector<double> estimates;
  double tail_ratio = 0.0;  // last increment / previous increment
  bool divergent = false;
};

DivergenceProbe probe_divergence(const std::function<double(double)>& f, double a, double b, int decades = 10);

}  // namespace mmtherm

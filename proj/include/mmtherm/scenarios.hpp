// SPDX-License-Identifier: Apache-2.0
//
// Registry of the worked scenarios: family, feasible region, energy
// observable, reference densities and closed forms.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmtherm/bayes.hpp"
#include "mmtherm/measure.hpp"
#include "mmtherm/metric.hpp"
#include "mmtherm/thermo.hpp"

namespace mmtherm {

/// A known closed-form density for a scenario, in the scenario's integration coordinates.
struct ReferenceDensity {
  enum class Form {
    Normalized,    // integrates to 1 over the region
    Unnormalized,  // equals the metric volume element exactly
    Proportional,  // equals the volume element up to a constant
  };
  DensityFn fn;
  Form form = Form::Normalized;
  std::string formula;
  /// False when the closed form is known not to be the metric's volume element.
  bool matches_metric = true;
  std::string note;
};

struct Scenario {
  std::string id;
  std::string description;
  std::string group;  // family of related scenarios, for listings
  std::shared_ptr<const AffineFamily> family;  // null for radial-weight scenarios
  Region region;                               // integration region in `coords`
  std::vector<std::string> coords;
  EnergyObservable energy;
  std::vector<MetricKind> kinds;
  MetricKind default_kind = MetricKind::Minimal;
  bool unresolved = false;

  /// Unnormalized volume element in `coords`.
  std::function<DensityFn(MetricKind)> volume;
  std::map<MetricKind, ReferenceDensity> reference;
  /// Metric kinds whose volume element is not normalizable on the region.
  std::vector<MetricKind> improper;
  /// Known normalization constants of the volume element.
  std::map<MetricKind, double> normalization;
  /// Regions for the shrunken-domain limit when the region is not a ball.
  std::optional<RegionFamily> shrink_regions;
  /// Metric kinds for which closed_form(id) applies.
  std::vector<MetricKind> closed_kinds;
  /// Pauli axis of the joint spin measurement, 0 if none.
  int measurement_axis = 0;
  std::vector<std::string> notes;

  bool supports(MetricKind k) const;
  bool is_improper(MetricKind k) const;
  bool has_closed_form(MetricKind k) const;
  int dim() const { return region_dim(region); }
};

const std::vector<std::string>& scenario_ids();
const Scenario& get_scenario(const std::string& id);

/// Normalized prior from the metric volume element. Throws DivergenceError
/// ("improper prior; use --shrink-limit") for improper kinds.
Prior scenario_prior(const Scenario& s, MetricKind kind, double tol = 1e-10);

/// Energy-axis marginal in the shrunken-domain limit.
ShrinkLimitResult scenario_shrink_limit(const Scenario& s, MetricKind kind, std::size_t grid = 201);

/// One-dimensional prior along the energy axis: direct marginal, or the shrink limit for improper kinds.
Prior energy_axis_prior(const Scenario& s, MetricKind kind, bool shrink_limit, std::size_t grid = 201);

ThermoCurve scenario_thermo_curve(const Scenario& s, MetricKind kind, const std::vector<double>& betas, double h,
                                  bool shrink_limit = false);

/// Two-outcome (A/D) and four-outcome likelihoods for the scenario's joint spin measurement.
std::vector<LabelledLikelihood> scenario_likelihoods(const Scenario& s, bool grouped);

std::string scenarios_json();

}  // namespace mmtherm

// SPDX-License-Identifier: Apache-2.0
//
// mmtherm: scenario listing, prior tabulation, thermodynamic curves,
// information gains, metric comparison and the validation run.
//
// Exit codes: 0 success, 2 improper prior, 3 validation failure, 4 bad
// configuration, 1 anything else.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmtherm/bayes.hpp"
#include "mmtherm/errors.hpp"
#include "mmtherm/io.hpp"
#include "mmtherm/measure.hpp"
#include "mmtherm/metric.hpp"
#include "mmtherm/scenarios.hpp"
#include "mmtherm/thermo.hpp"
#include "mmtherm/validation.hpp"

namespace {

using namespace mmtherm;
using json = nlohmann::json;

enum Exit : int { kOk = 0, kFailure = 1, kImproper = 2, kValidation = 3, kBadConfig = 4 };

// Raw flag values; unset flags leave the config file and defaults alone.
struct Flags {
  std::optional<std::string> scenario, metric, beta, format, out, sequence, config;
  std::optional<double> h, tol;
  std::optional<std::size_t> grid, grid2d;
  bool shrink_limit = false;
  std::vector<int> criteria;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) apply_key_values(cfg, parse_key_values(read_text_file(*f.config)));
  std::map<std::string, std::string> kv;
  if (f.scenario) kv["scenario"] = *f.scenario;
  if (f.metric) kv["metric"] = *f.metric;
  if (f.beta) kv["beta"] = *f.beta;
  if (f.format) kv["format"] = *f.format;
  if (f.out) kv["out"] = *f.out;
  if (f.sequence) kv["sequence"] = *f.sequence;
  apply_key_values(cfg, kv);
  if (f.h) cfg.h = *f.h;
  if (f.tol) cfg.tol = *f.tol;
  if (f.grid) cfg.grid = *f.grid;
  if (f.shrink_limit) cfg.shrink_limit = true;
  cfg.validate();
  return cfg;
}

const Scenario& need_scenario(const RunConfig& cfg) {
  if (cfg.scenario.empty()) throw ConfigError("--scenario is required");
  try {
    return get_scenario(cfg.scenario == "s24-measurement" ? "s24" : cfg.scenario);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

MetricKind kind_for(const Scenario& s, const RunConfig& cfg) {
  const MetricKind k = cfg.kind.value_or(s.default_kind);
  if (!s.supports(k))
    throw ConfigError("scenario '" + s.id + "' does not support the " + std::string(to_string(k)) + " metric");
  return k;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json tabulated_json(const Tabulated1D& t) {
  return {{"x", t.x()}, {"density", t.density()}, {"integral", t.integral()}};
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + (ext.empty() ? ".csv" : ext);
}

// ---------------------------------------------------------------------------

int cmd_list(const RunConfig& cfg) {
  if (cfg.format == "json") {
    write_output(cfg.out, scenarios_json() + "\n");
    return kOk;
  }
  std::ostringstream os;
  os << std::left << std::setw(12) << "id" << std::setw(13) << "group" << std::setw(5) << "dim" << std::setw(18)
     << "metrics" << std::setw(12) << "status" << "description\n";
  for (const auto& id : scenario_ids()) {
    const auto& s = get_scenario(id);
    std::string kinds;
    for (auto k : s.kinds) {
      kinds += kinds.empty() ? "" : ",";
      kinds += std::string(to_string(k));
      if (s.is_improper(k)) kinds += "*";
    }
    os << std::setw(12) << s.id << std::setw(13) << s.group << std::setw(5) << s.dim() << std::setw(18)
       << (kinds.empty() ? "-" : kinds) << std::setw(12) << (s.unresolved ? "UNRESOLVED" : "ok") << s.description
       << '\n';
  }
  os << "(* improper: only the --shrink-limit route is available)\n";
  write_output(cfg.out, os.str());
  return kOk;
}

int cmd_prior(const RunConfig& cfg, std::size_t grid2d) {
  const auto& s = need_scenario(cfg);
  const MetricKind kind = kind_for(s, cfg);
  const int axis = s.energy.single_axis();
  const std::string name = s.coords[static_cast<std::size_t>(axis)];
  std::vector<std::string> meta{"scenario " + s.id, "metric " + std::string(to_string(kind)), "axis " + name};

  std::optional<Tabulated1D> table;
  std::optional<Prior> joint;
  double z = 1.0, residual = 0.0;
  if (cfg.shrink_limit) {
    const auto res = scenario_shrink_limit(s, kind, cfg.grid);
    table = res.marginal.normalized();
    residual = res.residual;
    meta.push_back("route shrink-limit, radii " + std::to_string(res.radii.size()));
    meta.push_back("residual " + num(residual));
  } else {
    joint = scenario_prior(s, kind, cfg.tol);
    z = joint->normalization();
    table = joint->dim() == 1
                ? Tabulated1D::from_function([&](double x) { return joint->density(Vector::Constant(1, x)); },
                                             axis_range(joint->region(), 0).a, axis_range(joint->region(), 0).b,
                                             cfg.grid)
                : marginal(*joint, axis, cfg.grid);
    residual = std::abs(table->integral() - 1.0);
    meta.push_back("normalization " + num(z));
    meta.push_back("residual " + num(residual));
  }

  if (cfg.format == "json") {
    json j{{"scenario", s.id},       {"metric", std::string(to_string(kind))}, {"axis", name},
           {"shrink_limit", cfg.shrink_limit}, {"normalization", z},           {"residual", residual},
           {"marginal", tabulated_json(*table)}};
    write_output(cfg.out, j.dump(2) + "\n");
  } else {
    write_output(cfg.out, table->to_csv(meta));
  }
  // The joint density goes next to the marginal file.
  if (joint && joint->dim() == 2 && !cfg.out.empty() && cfg.out != "-") {
    const auto path = sibling_path(cfg.out, ".grid");
    write_output(path, prior_grid_csv(*joint, grid2d, meta));
    std::cerr << "wrote " << path << '\n';
  }
  return kOk;
}

int cmd_thermo(const RunConfig& cfg) {
  const auto& s = need_scenario(cfg);
  const MetricKind kind = kind_for(s, cfg);
  auto curve = scenario_thermo_curve(s, kind, cfg.betas(), cfg.h, cfg.shrink_limit);
  curve.h = cfg.h;
  write_output(cfg.out, cfg.format == "json" ? curve.to_json() + "\n" : curve.to_csv());
  return kOk;
}

// Coordinate the likelihoods read, if it is only one; checked on interior points.
std::optional<int> likelihood_axis(const std::vector<LabelledLikelihood>& ls, const Prior& prior) {
  const Box box = bounding_box(prior.region());
  const int d = prior.dim();
  for (int axis = 0; axis < d; ++axis) {
    bool only = true;
    for (int i = 1; i <= 7 && only; ++i) {
      Vector full(d);
      for (int k = 0; k < d; ++k) {
        const auto& side = box.sides[static_cast<std::size_t>(k)];
        full(k) = side.a + (side.b - side.a) * std::fmod(0.137 * i * (k + 1) + 0.05, 1.0);
      }
      Vector reduced = Vector::Zero(d);
      reduced(axis) = full(axis);
      for (const auto& l : ls)
        if (std::abs(l.fn(full) - l.fn(reduced)) > 1e-14) only = false;
    }
    if (only) return axis;
  }
  return std::nullopt;
}

int cmd_infogain(const RunConfig& cfg) {
  const auto& s = need_scenario(cfg);
  if (s.measurement_axis == 0) throw ConfigError("scenario '" + s.id + "' has no joint spin measurement");
  for (char c : cfg.sequence)
    if (c != 'A' && c != 'D') throw ConfigError("--sequence: only A (agreement) and D (disagreement) are allowed");
  const Prior joint = scenario_prior(s, kind_for(s, cfg));

  // A likelihood reading one coordinate only needs that coordinate's marginal.
  auto route = [&](const std::vector<LabelledLikelihood>& ls) -> std::pair<Prior, std::vector<LabelledLikelihood>> {
    if (joint.dim() > 1)
      if (const auto axis = likelihood_axis(ls, joint))
        return {axis_marginal_prior(joint, *axis), restrict_to_axis(ls, joint.dim(), *axis)};
    return {joint, ls};
  };
  const auto [gp, gl] = route(scenario_likelihoods(s, true));
  const auto [up, ul] = route(scenario_likelihoods(s, false));

  const auto grouped = expected_gain(gp, gl);
  const auto ungrouped = expected_gain(up, ul);
  json j{{"scenario", cfg.scenario},
         {"sequence", cfg.sequence},
         {"grouped", json::parse(grouped.to_json())},
         {"ungrouped", json::parse(ungrouped.to_json())},
         {"expected_gain_grouped_nats", grouped.expected_gain_nats},
         {"expected_gain_ungrouped_nats", ungrouped.expected_gain_nats}};
  json steps = json::array();
  if (!cfg.sequence.empty())
    for (const auto& st : sequential_gains(gp, gl, cfg.sequence))
      steps.push_back({{"label", st.label}, {"gain_nats", st.gain_nats}, {"evidence", st.evidence}});
  j["steps"] = steps;
  write_output(cfg.out, j.dump(2) + "\n");
  return kOk;
}

int cmd_compare(const RunConfig& cfg) {
  const auto& s = need_scenario(cfg);
  if (s.unresolved) throw DomainError("scenario '" + s.id + "' is unresolved: no metric evaluation is available");
  if (!s.supports(MetricKind::Minimal) || !s.supports(MetricKind::Maximal))
    throw ConfigError("scenario '" + s.id + "' does not carry both metrics");
  const DensityFn vmin = s.volume(MetricKind::Minimal), vmax = s.volume(MetricKind::Maximal);
  const Box box = bounding_box(s.region);
  const int d = s.dim();
  if (d > 2) throw ConfigError("compare tabulates one- and two-parameter scenarios only");
  const std::size_t n = d == 1 ? cfg.grid : std::max<std::size_t>(3, static_cast<std::size_t>(std::sqrt(cfg.grid)) * 3);

  struct Row {
    Vector theta;
    double vmin, vmax;
  };
  std::vector<Row> rows;
  // Open grid: the endpoints sit on the boundary where both elements blow up.
  auto node = [&](int k, std::size_t i) {
    const auto& side = box.sides[static_cast<std::size_t>(k)];
    return side.a + (side.b - side.a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  };
  const std::size_t total = d == 1 ? n : n * n;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector t(d);
    t(0) = node(0, d == 1 ? idx : idx / n);
    if (d == 2) t(1) = node(1, idx % n);
    if (!contains(s.region, t)) continue;
    try {
      rows.push_back({t, vmin(t), vmax(t)});
    } catch (const InfeasibleError&) {
    }
  }
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"theta", std::vector<double>(r.theta.data(), r.theta.data() + d)},
                     {"minimal", r.vmin},
                     {"maximal", r.vmax},
                     {"ratio", r.vmax / r.vmin}});
    write_output(cfg.out, json{{"scenario", s.id}, {"coords", s.coords}, {"points", arr}}.dump(2) + "\n");
    return kOk;
  }
  std::ostringstream os;
  os << std::setprecision(17) << "# scenario " << s.id << '\n';
  for (const auto& c : s.coords) os << c << ',';
  os << "minimal,maximal,ratio\n";
  for (const auto& r : rows) {
    for (int k = 0; k < d; ++k) os << r.theta(k) << ',';
    os << r.vmin << ',' << r.vmax << ',' << r.vmax / r.vmin << '\n';
  }
  write_output(cfg.out, os.str());
  return kOk;
}

int cmd_validate(const RunConfig& cfg, const std::vector<int>& criteria) {
  std::vector<CriterionReport> crit;
  std::vector<ScenarioReport> scen;
  const bool only_scenario = !cfg.scenario.empty();
  if (only_scenario) {
    scen.push_back(validate_scenario(need_scenario(cfg).id, cfg.kind));
  } else {
    std::vector<int> ids = criteria;
    if (ids.empty())
      for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
    for (int id : ids) {
      if (id < 1 || id > kCriterionCount) throw ConfigError("--criterion must lie in 1.." + std::to_string(kCriterionCount));
      crit.push_back(run_criterion(id));
      std::cerr << report_text(crit.back()) << std::flush;
    }
    if (criteria.empty())
      for (const auto& id : scenario_ids()) {
        scen.push_back(validate_scenario(id, cfg.kind));
        std::cerr << report_text(scen.back()) << std::flush;
      }
  }
  if (only_scenario) std::cerr << report_text(scen.back());
  write_output(cfg.out, report_json(crit, scen) + "\n");
  bool ok = true;
  for (const auto& c : crit) ok = ok && c.pass();
  for (const auto& r : scen) ok = ok && r.pass();
  return ok ? kOk : kValidation;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--scenario", f.scenario, "scenario id (see `mmtherm list`)");
  sub->add_option("--metric", f.metric, "minimal|maximal");
  sub->add_option("--out", f.out, "output path; stdout when omitted");
  sub->add_option("--format", f.format, "csv|json");
  sub->add_option("--tol", f.tol, "quadrature tolerance");
  sub->add_option("--grid", f.grid, "points of tabulated marginals");
  sub->add_option("--config", f.config, "key=value file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone-metric priors and their thermodynamics"};
  app.require_subcommand(1);
  // `--h` is the energy scale, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");
  Flags f;

  auto* list = app.add_subcommand("list", "list scenarios");
  add_common(list, f);
  auto* prior = app.add_subcommand("prior", "tabulate the normalized prior and its energy-axis marginal");
  add_common(prior, f);
  prior->add_flag("--shrink-limit", f.shrink_limit, "use the shrunken-domain limit for improper priors");
  prior->add_option("--grid-2d", f.grid2d, "points per axis of the joint density grid (default 101)");
  auto* thermo = app.add_subcommand("thermo", "partition function, mean energy and variance over a beta grid");
  add_common(thermo, f);
  thermo->add_option("--beta", f.beta, "start:stop:step in units of 1/h");
  thermo->add_option("--h", f.h, "energy scale");
  thermo->add_flag("--shrink-limit", f.shrink_limit, "use the shrunken-domain limit for improper priors");
  auto* info = app.add_subcommand("infogain", "information gains of joint spin measurements");
  add_common(info, f);
  info->add_option("--sequence", f.sequence, "outcome sequence such as AD");
  auto* compare = app.add_subcommand("compare", "minimal and maximal volume elements side by side");
  add_common(compare, f);
  auto* validate = app.add_subcommand("validate", "run the reproduction checks and emit a JSON report");
  add_common(validate, f);
  validate->add_option("--criterion", f.criteria, "run only these acceptance criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    const RunConfig cfg = resolve(f);
    if (*list) return cmd_list(cfg);
    if (*prior) return cmd_prior(cfg, f.grid2d.value_or(101));
    if (*thermo) return cmd_thermo(cfg);
    if (*info) return cmd_infogain(cfg);
    if (*compare) return cmd_compare(cfg);
    if (*validate) return cmd_validate(cfg, f.criteria);
  } catch (const ConfigError& e) {
    std::cerr << "mmtherm: " << e.what() << '\n';
    return kBadConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "mmtherm: " << e.what() << '\n';
    return kImproper;
  } catch (const std::exception& e) {
    std::cerr << "mmtherm: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

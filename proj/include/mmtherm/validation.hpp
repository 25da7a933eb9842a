// SPDX-License-Identifier: Apache-2.0
//
// Reproduction checks: one report per acceptance criterion and a per-scenario
// consistency report. Failures are report content, never exceptions.
#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmtherm/metric.hpp"

namespace mmtherm {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
  double tol = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct CriterionReport {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;

  bool pass() const;
};

inline constexpr int kCriterionCount = 13;

std::string criterion_title(int id);
/// Runs criterion `id` in 1..kCriterionCount. An exception inside a check is
/// recorded as a failed check carrying the message.
CriterionReport run_criterion(int id);

struct ScenarioReport {
  std::string scenario;
  std::vector<MetricKind> kinds;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;

  bool pass() const;
};

/// Normalization, reference densities, closed forms, moment identities and
/// (where the scenario has a measurement) evidence sums. `kind` restricts the
/// metric; by default every supported kind is checked.
ScenarioReport validate_scenario(const std::string& id, std::optional<MetricKind> kind = std::nullopt);

std::string report_json(const std::vector<CriterionReport>& criteria, const std::vector<ScenarioReport>& scenarios);
/// One line per check, "PASS"/"FAIL" first.
std::string report_text(const CriterionReport& report);
std::string report_text(const ScenarioReport& report);

}  // namespace mmtherm

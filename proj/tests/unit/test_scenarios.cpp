// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <json.hpp>

#include "mmtherm/errors.hpp"
#include "mmtherm/scenarios.hpp"
#include "mmtherm/validation.hpp"

using namespace mmtherm;

TEST_SUITE("scenarios") {
  TEST_CASE("registry") {
    const auto& ids = scenario_ids();
    CHECK(ids.size() >= 18);
    for (const char* id : {"s21", "s3", "quat-max", "s26-4-open", "bloch-min", "single-min"})
      CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
    CHECK(get_scenario("s26-4-open").unresolved);
    CHECK_THROWS_AS(get_scenario("nope"), DomainError);
    const auto j = nlohmann::json::parse(scenarios_json());
    CHECK(j.at("scenarios").size() == ids.size());
  }

  TEST_CASE("improper and unresolved requests") {
    CHECK_THROWS_AS(scenario_prior(get_scenario("bloch-max"), MetricKind::Maximal), DivergenceError);
    CHECK_THROWS_AS(scenario_prior(get_scenario("s26-4-open"), MetricKind::Minimal), DomainError);
    CHECK(get_scenario("s22").is_improper(MetricKind::Maximal));
  }

  TEST_CASE("one-parameter priors are normalized") {
    for (const char* id : {"s23a", "s24", "s25-3", "s25-4", "s26-3", "single-min"}) {
      CAPTURE(id);
      const Prior p = scenario_prior(get_scenario(id), MetricKind::Minimal);
      CHECK(expectation(p, [](const Vector&) { return 1.0; }) == doctest::Approx(1.0).epsilon(2e-10));
    }
  }

  TEST_CASE("per-scenario validation") {
    const auto r = validate_scenario("s26-3");
    CHECK(r.pass());
    bool noted = false;
    for (const auto& n : r.notes) noted = noted || n.find("sqrt(4 - 36 zeta^2)") != std::string::npos;
    CHECK(noted);
    CHECK(validate_scenario("s21", MetricKind::Maximal).pass());
    const auto open = validate_scenario("s26-4-open");
    CHECK(open.notes.size() >= 1);
  }

  TEST_CASE("criterion reports serialize") {
    const auto c = run_criterion(1);
    CHECK(c.pass());
    const auto j = nlohmann::json::parse(report_json({c}, {}));
    CHECK(j.contains("criteria"));
    CHECK(report_text(c).rfind("PASS", 0) == 0);
    CHECK(criterion_title(12).size() > 0);
  }
}

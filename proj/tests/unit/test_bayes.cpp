// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "mmtherm/bayes.hpp"
#include "mmtherm/errors.hpp"
#include "mmtherm/scenarios.hpp"

using namespace mmtherm;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_SUITE("bayes") {
  TEST_CASE("spin measurements are complete projective measurements") {
    for (int letter : {1, 2, 3})
      for (bool grouped : {true, false}) {
        const auto m = spin_measurement(2, letter, grouped);
        CHECK(m.size() == (grouped ? 2u : 4u));
        CHECK_NOTHROW(m.validate(4));
      }
    const auto g = spin_measurement(2, 3, true);
    CHECK(g.index("A") != g.index("D"));
    CHECK_THROWS_AS(g.index("X"), DomainError);
  }

  TEST_CASE("posterior and KL gain of a coin-like likelihood") {
    // Uniform prior on [0, 1], likelihood x: posterior 2x, gain ∫2x log 2x = log 2 − 1/2.
    const Prior p = normalize_prior([](const Vector&) { return 1.0; }, Interval{0, 1});
    const auto [post, evidence] = posterior(p, [](const Vector& x) { return x(0); });
    CHECK(evidence == doctest::Approx(0.5));
    CHECK(post.density(v1(0.25)) == doctest::Approx(0.5));
    CHECK(kl_gain(post, p) == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-10));
  }

  TEST_CASE("expected gain weights outcome gains by evidence") {
    const Prior p = normalize_prior([](const Vector&) { return 1.0; }, Interval{0, 1});
    const std::vector<LabelledLikelihood> ls{{"H", [](const Vector& x) { return x(0); }},
                                             {"T", [](const Vector& x) { return 1 - x(0); }}};
    const auto r = expected_gain(p, ls);
    CHECK(r.evidence_sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.expected_gain_nats == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-10));
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["outcomes"].size() == 2);
    const auto steps = sequential_gains(p, ls, "H,T");
    REQUIRE(steps.size() == 2);
    CHECK(steps[1].evidence == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }

  TEST_CASE("s21 single-step gains") {
    const auto& s = get_scenario("s21");
    const Prior p = scenario_prior(s, MetricKind::Minimal);
    const auto r = expected_gain(p, scenario_likelihoods(s, true));
    CHECK(r.evidence_sum() == doctest::Approx(1.0).epsilon(1e-8));
    for (const auto& o : r.outcomes) CHECK(o.gain_nats == doctest::Approx(o.label == "A" ? 0.125093 : 0.431946).epsilon(1e-4));
  }

  TEST_CASE("anticorrelated variant swaps agreement and disagreement") {
    auto gains = [](const char* id) {
      const auto& s = get_scenario(id);
      std::map<std::string, double> g;
      for (const auto& o : expected_gain(scenario_prior(s, MetricKind::Minimal), scenario_likelihoods(s, true)).outcomes)
        g[o.label] = o.gain_nats;
      return g;
    };
    const auto a = gains("s21"), b = gains("s21-anti");
    CHECK(a.at("A") == doctest::Approx(b.at("D")).epsilon(1e-8));
    CHECK(a.at("D") == doctest::Approx(b.at("A")).epsilon(1e-8));
  }

  TEST_CASE("bad sequences are rejected") {
    const Prior p = normalize_prior([](const Vector&) { return 1.0; }, Interval{0, 1});
    const std::vector<LabelledLikelihood> ls{{"A", [](const Vector& x) { return x(0); }},
                                             {"D", [](const Vector& x) { return 1 - x(0); }}};
    CHECK_THROWS_AS(sequential_gains(p, ls, "AX"), DomainError);
  }
}

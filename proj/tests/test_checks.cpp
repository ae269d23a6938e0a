#include <doctest.h>

#include <sstream>

#include "twinmigrate/checks.hpp"

using namespace twinmigrate;

TEST_CASE("all suites pass on a short run") {
  CheckConfig c;
  c.seed = 1000;
  c.set_trials(5);
  const CheckReport r = run_checks(c);
  REQUIRE(r.suites.size() == 5);
  for (const SuiteResult& s : r.suites) {
    CHECK_MESSAGE(s.passed(), s.name << ": " << s.first_failure);
    CHECK(s.trials == 5);
    CHECK(s.checks > 0);
  }
  std::ostringstream out;
  print_check_report(out, r);
  CHECK(out.str().find("derivative") != std::string::npos);
  CHECK(out.str().find("trials=5") != std::string::npos);
}

TEST_CASE("a sign flip in the MSP gradient is caught") {
  CheckConfig c;
  c.derivative_trials = 10;
  c.hooks.msp_grad = [](std::size_t i, std::size_t j, const StrategyProfile& p, const Scenario& s) {
    Derivatives d = msp_utility_grad(i, j, p, s);
    d.second = -d.second;
    return d;
  };
  const SuiteResult r = check_derivatives(c);
  CHECK_FALSE(r.passed());
  REQUIRE(r.first_failing_seed.has_value());
  CHECK(*r.first_failing_seed == 0);
  CHECK(r.first_failure.find("d2U_F") != std::string::npos);
}

TEST_CASE("a wrong leader slope is caught") {
  CheckConfig c;
  c.derivative_trials = 10;
  c.hooks.mrp_derivs = [](std::size_t j, const StrategyProfile& p, const Scenario& s) {
    Derivatives d = mrp_utility_derivs(j, p, s);
    d.first *= 1.01;
    return d;
  };
  CHECK_FALSE(check_derivatives(c).passed());
}

TEST_CASE("a failing seed reproduces with a single trial") {
  CheckConfig c;
  c.derivative_trials = 20;
  c.hooks.msp_grad = [](std::size_t i, std::size_t j, const StrategyProfile& p, const Scenario& s) {
    Derivatives d = msp_utility_grad(i, j, p, s);
    if (s.n_msps() >= 4) d.first += 1.0;
    return d;
  };
  const SuiteResult r = check_derivatives(c);
  REQUIRE(r.first_failing_seed.has_value());
  CheckConfig again = c;
  again.seed = *r.first_failing_seed;
  again.derivative_trials = 1;
  CHECK(check_derivatives(again).failures == 1);
}

#pragma once

// Randomized property suites over sampled scenarios. Trial t of every suite
// samples its scenario with seed `seed + t`, so a failure is reproduced by
// re-running that suite from the reported seed with one trial.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twinmigrate/game_model.hpp"

namespace twinmigrate {

// Injection points for the analytic derivatives, so tests can verify that the
// derivative suite notices a wrong formula.
struct DerivativeHooks {
  std::function<Derivatives(std::size_t, std::size_t, const StrategyProfile&, const Scenario&)>
      msp_grad = msp_utility_grad;
  std::function<Derivatives(std::size_t, const StrategyProfile&, const Scenario&)> mrp_derivs =
      mrp_utility_derivs;
};

struct CheckConfig {
  std::uint64_t seed = 0;
  std::size_t derivative_trials = 100;
  std::size_t standard_function_trials = 1000;
  std::size_t uniqueness_trials = 50;
  std::size_t uniqueness_inits = 10;
  std::size_t concavity_trials = 20;
  std::size_t delay_trials = 1000;

  double msp_derivative_rtol = 1e-6;
  double mrp_derivative_rtol = 1e-4;
  double uniqueness_spread = 1e-6;

  DerivativeHooks hooks;

  // Sets every suite's trial count.
  void set_trials(std::size_t trials);
};

struct SuiteResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t checks = 0;    // individual assertions evaluated
  std::size_t failures = 0;  // failing trials
  std::size_t skipped = 0;   // trials whose sample fell outside the suite's domain
  std::optional<std::uint64_t> first_failing_seed;
  std::string first_failure;
  double seconds = 0.0;

  bool passed() const { return failures == 0; }
};

SuiteResult check_derivatives(const CheckConfig& config);
SuiteResult check_standard_function(const CheckConfig& config);
SuiteResult check_follower_uniqueness(const CheckConfig& config);
SuiteResult check_leader_unimodality(const CheckConfig& config);
SuiteResult check_delay_monotonicity(const CheckConfig& config);

struct CheckReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

CheckReport run_checks(const CheckConfig& config);
void print_check_report(std::ostream& out, const CheckReport& report);

}  // namespace twinmigrate

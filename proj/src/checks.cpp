#include "twinmigrate/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "twinmigrate/equilibrium.hpp"
#include "twinmigrate/errors.hpp"
#include "twinmigrate/rng.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

namespace {

enum SuiteTag : std::uint64_t {
  kDerivative = 11,
  kStandard = 12,
  kUniqueness = 13,
  kUnimodal = 14,
  kDelay = 15,
};

struct Trial {
  std::uint64_t seed;
  RandomStream rng;
  Scenario scenario;
};

Trial make_trial(std::uint64_t seed, SuiteTag tag) {
  RandomStream rng(derive_seed(seed, {tag}));
  ScenarioSpec spec;
  spec.seed = seed;
  spec.n_msps = 2 + static_cast<int>(rng.uniform() * 5.0);
  spec.n_mrps = 2 + static_cast<int>(rng.uniform() * 3.0);
  return {seed, rng, sample_scenario(spec)};
}

Eigen::VectorXd random_prices(RandomStream& rng, const Scenario& s) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(s.n_mrps()));
  for (std::size_t j = 0; j < s.n_mrps(); ++j)
    p(static_cast<Eigen::Index>(j)) = rng.uniform(s.mrp(j).cost, s.mrp(j).price_max);
  return p;
}

Eigen::MatrixXd random_demands(RandomStream& rng, const Scenario& s, double lo_frac = 0.0,
                               double hi_frac = 1.0) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(s.n_msps()), static_cast<Eigen::Index>(s.n_mrps()));
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      b(i, j) = rng.uniform(lo_frac * s.demand_max(), hi_frac * s.demand_max());
  return b;
}

bool close_rel(double analytic, double numeric, double rtol, double atol) {
  return std::abs(analytic - numeric) <= rtol * std::max(std::abs(analytic), std::abs(numeric)) + atol;
}

// Runs `trial` for every seed, recording the first failure. `trial` returns
// an empty string on success, "skip" when the sample is outside the domain,
// and a description otherwise; it adds its assertion count to `checks`.
template <class F>
SuiteResult run_suite(const std::string& name, std::uint64_t seed, std::size_t trials, F trial) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  r.name = name;
  r.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + t;
    std::string outcome;
    try {
      outcome = trial(s, r.checks);
    } catch (const std::exception& e) {
      outcome = std::string("exception: ") + e.what();
    }
    if (outcome.empty()) continue;
    if (outcome == "skip") {
      ++r.skipped;
      continue;
    }
    ++r.failures;
    if (!r.first_failing_seed) {
      r.first_failing_seed = s;
      r.first_failure = outcome;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string describe(const char* what, std::size_t a, std::size_t b, double analytic,
                     double numeric) {
  std::ostringstream os;
  os << std::setprecision(12) << what << " (" << a << ", " << b << "): analytic " << analytic
     << " vs finite difference " << numeric;
  return os.str();
}

Eigen::MatrixXd unconstrained_followers(const Eigen::VectorXd& prices, const Scenario& s) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.n_msps()),
                                                     static_cast<Eigen::Index>(s.n_mrps()));
  return follower_fixed_point(prices, zero, s, 1e-14, 100000).demands;
}

// Bitmask of MSPs with a strictly interior response in column j; -1 when
// some response sits within `margin` of a kink.
long long free_set(std::size_t j, const StrategyProfile& profile, const Scenario& s,
                   double margin) {
  long long mask = 0;
  const double p = profile.prices(static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < s.n_msps(); ++i) {
    const double psi = interior_response(i, j, profile.demands, p, s);
    if (std::abs(psi) < margin || std::abs(psi - s.demand_max()) < margin) return -1;
    if (psi > 0.0 && psi < s.demand_max()) mask |= 1LL << i;
  }
  return mask;
}

}  // namespace

void CheckConfig::set_trials(std::size_t trials) {
  derivative_trials = trials;
  standard_function_trials = trials;
  uniqueness_trials = trials;
  concavity_trials = trials;
  delay_trials = trials;
}

SuiteResult check_derivatives(const CheckConfig& config) {
  return run_suite("derivative", config.seed, config.derivative_trials,
                   [&](std::uint64_t seed, std::size_t& checks) -> std::string {
    Trial tr = make_trial(seed, kDerivative);
    const Scenario& s = tr.scenario;
    StrategyProfile profile{random_prices(tr.rng, s), random_demands(tr.rng, s, 0.05, 0.95)};

    for (std::size_t i = 0; i < s.n_msps(); ++i)
      for (std::size_t j = 0; j < s.n_mrps(); ++j) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const Derivatives d = config.hooks.msp_grad(i, j, profile, s);
        StrategyProfile moved = profile;
        const auto f = [&](double b) {
          moved.demands(ii, jj) = b;
          return msp_utility(i, moved, s);
        };
        const double x = profile.demands(ii, jj);
        const double h1 = 1e-5;
        const double h2 = 1e-3;
        const double first = (f(x + h1) - f(x - h1)) / (2.0 * h1);
        const double second = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
        checks += 2;
        if (!close_rel(d.first, first, config.msp_derivative_rtol, 1e-10))
          return describe("dU_F/db", i, j, d.first, first);
        if (!close_rel(d.second, second, config.msp_derivative_rtol, 1e-10))
          return describe("d2U_F/db2", i, j, d.second, second);
      }

    // Composed leader derivative along the unconstrained follower response.
    profile.demands = unconstrained_followers(profile.prices, s);
    for (std::size_t j = 0; j < s.n_mrps(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double p = profile.prices(jj);
      const double h1 = 1e-5 * std::max(1.0, p);
      const double h2 = 1e-3 * std::max(1.0, p);
      const auto reduced = [&](double q) {
        StrategyProfile at = profile;
        at.prices(jj) = q;
        at.demands = unconstrained_followers(at.prices, s);
        return at;
      };
      const long long mask = free_set(j, profile, s, 1e-2);
      const StrategyProfile lo = reduced(p - h2);
      const StrategyProfile hi = reduced(p + h2);
      if (mask < 0 || free_set(j, lo, s, 0.0) != mask || free_set(j, hi, s, 0.0) != mask) continue;

      const Derivatives d = config.hooks.mrp_derivs(j, profile, s);
      const auto u = [&](double q) { return mrp_utility(j, reduced(q), s); };
      const double first = (u(p + h1) - u(p - h1)) / (2.0 * h1);
      const double second =
          (mrp_utility(j, hi, s) - 2.0 * mrp_utility(j, profile, s) + mrp_utility(j, lo, s)) /
          (h2 * h2);
      checks += 2;
      if (!close_rel(d.first, first, config.mrp_derivative_rtol, 1e-8))
        return describe("dU_L/dp", j, j, d.first, first);
      if (!close_rel(d.second, second, config.mrp_derivative_rtol, 1e-6))
        return describe("d2U_L/dp2", j, j, d.second, second);
    }
    return {};
  });
}

SuiteResult check_standard_function(const CheckConfig& config) {
  return run_suite("standard_function", config.seed, config.standard_function_trials,
                   [&](std::uint64_t seed, std::size_t& checks) -> std::string {
    Trial tr = make_trial(seed, kStandard);
    const Scenario& s = tr.scenario;
    // Redraw (B, p, i, j) until alpha_i > p_j and U_Fi >= 0.
    for (int attempt = 0; attempt < 100; ++attempt) {
      const StrategyProfile profile{random_prices(tr.rng, s), random_demands(tr.rng, s)};
      const auto i = static_cast<std::size_t>(tr.rng.uniform() * static_cast<double>(s.n_msps()));
      const auto j = static_cast<std::size_t>(tr.rng.uniform() * static_cast<double>(s.n_mrps()));
      const double p = profile.prices(static_cast<Eigen::Index>(j));
      if (!(s.msp(i).alpha > p) || msp_utility(i, profile, s) < 0.0) continue;

      const double psi = interior_response(i, j, profile.demands, p, s);
      ++checks;
      if (!(psi > 0.0)) return describe("positivity", i, j, psi, 0.0);

      Eigen::MatrixXd raised = profile.demands;
      for (Eigen::Index k = 0; k < raised.rows(); ++k)
        if (k != static_cast<Eigen::Index>(i))
          raised(k, static_cast<Eigen::Index>(j)) += tr.rng.uniform(1e-6, 0.5);
      const double psi_raised = interior_response(i, j, raised, p, s);
      ++checks;
      if (!(psi_raised >= psi)) return describe("monotonicity", i, j, psi_raised, psi);

      for (double delta : {1.5, 2.0, 10.0}) {
        const Eigen::MatrixXd scaled = delta * profile.demands;
        const double psi_scaled = interior_response(i, j, scaled, p, s);
        ++checks;
        if (!(delta * psi > psi_scaled)) return describe("scalability", i, j, delta * psi, psi_scaled);
      }
      return {};
    }
    return "skip";
  });
}

SuiteResult check_follower_uniqueness(const CheckConfig& config) {
  return run_suite("follower_uniqueness", config.seed, config.uniqueness_trials,
                   [&](std::uint64_t seed, std::size_t& checks) -> std::string {
    Trial tr = make_trial(seed, kUniqueness);
    const Scenario& s = tr.scenario;
    const Eigen::VectorXd prices = random_prices(tr.rng, s);
    const auto n = static_cast<Eigen::Index>(s.n_msps());
    const auto m = static_cast<Eigen::Index>(s.n_mrps());

    Eigen::MatrixXd reference;
    FollowerEquilibrium constrained_reference;
    AdmmConfig admm;
    admm.inner_tol = 1e-12;
    for (std::size_t k = 0; k < config.uniqueness_inits; ++k) {
      const Eigen::MatrixXd init = k == 0 ? Eigen::MatrixXd::Zero(n, m) : random_demands(tr.rng, s);
      const Eigen::MatrixXd b = follower_fixed_point(prices, init, s, 1e-12, 100000).demands;

      FollowerEquilibrium warm;
      warm.demands = init;
      warm.multipliers = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) warm.multipliers(i) = tr.rng.uniform(0.0, 10.0);
      warm.delay_infeasible.assign(static_cast<std::size_t>(n), false);
      const FollowerEquilibrium c = solve_followers(prices, s, admm, &warm);

      if (k == 0) {
        reference = b;
        constrained_reference = c;
        continue;
      }
      checks += 2;
      const double spread = (b - reference).cwiseAbs().maxCoeff();
      if (spread > config.uniqueness_spread)
        return describe("unconstrained spread", k, 0, spread, config.uniqueness_spread);
      const double cspread = (c.demands - constrained_reference.demands).cwiseAbs().maxCoeff();
      if (cspread > config.uniqueness_spread)
        return describe("constrained spread", k, 0, cspread, config.uniqueness_spread);
    }
    return {};
  });
}

SuiteResult check_leader_unimodality(const CheckConfig& config) {
  return run_suite("leader_unimodality", config.seed, config.concavity_trials,
                   [&](std::uint64_t seed, std::size_t& checks) -> std::string {
    Trial tr = make_trial(seed, kUnimodal);
    const Scenario& s = tr.scenario;
    const Eigen::VectorXd prices = random_prices(tr.rng, s);
    const AdmmConfig admm;
    constexpr int kGrid = 129;

    for (std::size_t j = 0; j < s.n_mrps(); ++j) {
      const MrpParams& r = s.mrp(j);
      std::vector<double> u(kGrid);
      for (int k = 0; k < kGrid; ++k)
        u[static_cast<std::size_t>(k)] = reduced_mrp_utility(
            j, r.cost + (r.price_max - r.cost) * k / (kGrid - 1.0), prices, s, admm);
      const auto peak = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
      for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        const double tol = 1e-9 * std::max(1.0, std::abs(u[k]));
        ++checks;
        if (k < peak && u[k + 1] < u[k] - tol) return describe("dip before peak", j, k, u[k + 1], u[k]);
        if (k >= peak && u[k + 1] > u[k] + tol) return describe("rise after peak", j, k, u[k + 1], u[k]);
      }

      // Strict concavity of the unconstrained reduced objective at random prices.
      for (int k = 0; k < 8; ++k) {
        StrategyProfile at{prices, {}};
        at.prices(static_cast<Eigen::Index>(j)) = tr.rng.uniform(r.cost, r.price_max);
        at.demands = unconstrained_followers(at.prices, s);
        if (at.prices(static_cast<Eigen::Index>(j)) <= r.cost) continue;
        const Derivatives d = mrp_utility_derivs(j, at, s);
        ++checks;
        if (!(d.second < 0.0)) return describe("U_L'' sign", j, k, d.second, 0.0);
      }
    }
    return {};
  });
}

SuiteResult check_delay_monotonicity(const CheckConfig& config) {
  return run_suite("delay_monotonicity", config.seed, config.delay_trials,
                   [&](std::uint64_t seed, std::size_t& checks) -> std::string {
    Trial tr = make_trial(seed, kDelay);
    const Scenario& s = tr.scenario;
    const auto i = static_cast<std::size_t>(tr.rng.uniform() * static_cast<double>(s.n_msps()));
    const auto j = static_cast<std::size_t>(tr.rng.uniform() * static_cast<double>(s.n_mrps()));
    const double b1 = tr.rng.uniform(1e-3, 1.0) * s.demand_max();
    const double b2 = b1 + tr.rng.uniform(1e-3, 1.0) * (s.demand_max() - b1);

    const DelayBreakdown d1 = migration_delay(i, j, b1, s);
    const DelayBreakdown d2 = migration_delay(i, j, b2, s);
    checks += 2;
    if (b2 > b1 && !(d2.total_s < d1.total_s)) return describe("total delay vs bandwidth", i, j, d2.total_s, d1.total_s);
    if (!std::isinf(migration_delay(i, j, 0.0, s).transmission_s)) return "zero bandwidth must give infinite delay";

    std::vector<double> arrival, service;
    for (const MrpParams& r : s.mrps()) {
      arrival.push_back(r.arrival_rate);
      service.push_back(r.service_rate);
    }
    arrival[j] = arrival[j] + tr.rng.uniform(0.0, 1.0) * (service[j] - arrival[j]) * 0.9;
    const Scenario busier = s.with_mrp_rates(arrival, service);
    ++checks;
    if (!(migration_delay(i, j, b1, busier).queue_s >= d1.queue_s))
      return describe("queue delay vs arrival rate", i, j, migration_delay(i, j, b1, busier).queue_s, d1.queue_s);

    const StrategyProfile profile{random_prices(tr.rng, s), random_demands(tr.rng, s, 0.01, 1.0)};
    const Eigen::VectorXd theta = pairing_probabilities(profile.prices);
    Eigen::VectorXd row = profile.demands.row(static_cast<Eigen::Index>(i)).transpose();
    const double before = expected_delay(i, theta, row, s);
    row(static_cast<Eigen::Index>(j)) = std::min(s.demand_max(), row(static_cast<Eigen::Index>(j)) + 0.05);
    const double after = expected_delay(i, theta, row, s);
    ++checks;
    if (!(after <= before)) return describe("expected delay vs bandwidth", i, j, after, before);
    return {};
  });
}

bool CheckReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& r) { return r.passed(); });
}

CheckReport run_checks(const CheckConfig& config) {
  CheckReport report;
  report.suites.push_back(check_derivatives(config));
  report.suites.push_back(check_standard_function(config));
  report.suites.push_back(check_follower_uniqueness(config));
  report.suites.push_back(check_leader_unimodality(config));
  report.suites.push_back(check_delay_monotonicity(config));
  return report;
}

void print_check_report(std::ostream& out, const CheckReport& report) {
  for (const SuiteResult& r : report.suites) {
    out << std::left << std::setw(22) << r.name << " trials=" << r.trials << " checks=" << r.checks
        << " skipped=" << r.skipped << " failures=" << r.failures << " time=" << std::fixed
        << std::setprecision(2) << r.seconds << "s " << (r.passed() ? "PASS" : "FAIL") << '\n';
    out.unsetf(std::ios::floatfield);
    if (r.first_failing_seed)
      out << "  first failing seed " << *r.first_failing_seed << ": " << r.first_failure << '\n';
  }
  out << (report.passed() ? "all suites passed" : "some suites FAILED") << '\n';
}

}  // namespace twinmigrate

#include "twinmigrate/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twinmigrate/golden.hpp"
#include "twinmigrate/rng.hpp"

namespace twinmigrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kStallLimit = 5;

// Per-MSP delay model at fixed prices: T_ij(b) = D_i / (b R) + fixed_ij.
struct DelayModel {
  DelayModel(const Scenario& s, const Eigen::VectorXd& prices)
      : theta(pairing_probabilities(prices)),
        rate(s.unit_rate_bps()),
        fixed(static_cast<Eigen::Index>(s.n_msps()), static_cast<Eigen::Index>(s.n_mrps())) {
    for (std::size_t i = 0; i < s.n_msps(); ++i)
      for (std::size_t j = 0; j < s.n_mrps(); ++j) {
        const DelayBreakdown d = migration_delay(i, j, 1.0, s);
        fixed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            d.queue_s + d.reinstantiation_s;
      }
  }

  double weighted(const Scenario& s, std::size_t i, Eigen::Index j, double b) const {
    if (theta(j) == 0.0) return 0.0;
    const double tran = b > 0.0 ? s.msp(i).task.data_size_bits / (b * rate) : kInf;
    return theta(j) * (tran + fixed(static_cast<Eigen::Index>(i), j));
  }

  double expected(const Scenario& s, std::size_t i, const Eigen::VectorXd& row) const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) total += weighted(s, i, j, row(j));
    return total;
  }

  Eigen::VectorXd theta;
  double rate;
  Eigen::MatrixXd fixed;
};

Eigen::MatrixXd decoupled_start(const Eigen::VectorXd& prices, const Scenario& s) {
  const auto n = static_cast<Eigen::Index>(s.n_msps());
  const auto m = static_cast<Eigen::Index>(s.n_mrps());
  Eigen::MatrixXd b(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const MspParams& msp = s.msp(static_cast<std::size_t>(i));
      b(i, j) = std::clamp((msp.alpha - prices(j)) / (2.0 * msp.beta), 0.0, s.demand_max());
    }
  return b;
}

// Stationary demand for one MRP when the delay term carries weight mu >= 0:
// the root of (alpha + pull - p) - 2 beta b + mu D / (R b^2) = 0 on
// (0, demand_max]. theta_j cancels from both terms.
double weighted_response(double drive, double beta, double mu, double transfer_s, double dmax) {
  if (mu <= 0.0) return std::clamp(drive / (2.0 * beta), 0.0, dmax);
  const auto slope = [&](double b) { return drive - 2.0 * beta * b + mu * transfer_s / (b * b); };
  if (slope(dmax) >= 0.0) return dmax;
  // The slope is decreasing and convex in b, so Newton steps started left of
  // the root climb to it without overshooting.
  double b = dmax;
  while (slope(b) <= 0.0) b *= 0.5;
  for (int it = 0; it < 100; ++it) {
    const double step = slope(b) / (2.0 * beta + 2.0 * mu * transfer_s / (b * b * b));
    b += step;
    if (step <= 1e-15 * b) break;
  }
  return std::min(b, dmax);
}

// The row maximizing U_Fi - mu * sum_j theta_j T_ij for MSP i.
struct RowResponse {
  RowResponse(std::size_t i_, const Eigen::MatrixXd& social_source, const Eigen::VectorXd& prices,
              const DelayModel& delay_, const Scenario& scenario_)
      : i(i_), delay(delay_), scenario(scenario_), drive(prices.size()) {
    const MspParams& msp = scenario.msp(i);
    transfer_s = msp.task.data_size_bits / delay.rate;
    for (Eigen::Index j = 0; j < prices.size(); ++j)
      drive(j) = msp.alpha + social_pull(i, static_cast<std::size_t>(j), social_source, scenario) -
                 prices(j);
  }

  Eigen::VectorXd row(double mu) const {
    const MspParams& msp = scenario.msp(i);
    Eigen::VectorXd out(drive.size());
    for (Eigen::Index j = 0; j < drive.size(); ++j)
      out(j) = delay.theta(j) > 0.0
                   ? weighted_response(drive(j), msp.beta, mu, transfer_s, scenario.demand_max())
                   : std::clamp(drive(j) / (2.0 * msp.beta), 0.0, scenario.demand_max());
    return out;
  }

  // Constraint value g = expected delay - budget at row(mu); decreasing in mu.
  double slack(double mu) const {
    return delay.expected(scenario, i, row(mu)) - scenario.msp(i).task.max_delay_s;
  }

  std::size_t i;
  const DelayModel& delay;
  const Scenario& scenario;
  Eigen::VectorXd drive;
  double transfer_s = 0.0;
};

// Root of an increasing h on [0, inf); 0 when h(0) >= 0. Bracket by
// doubling, then Illinois false position.
template <class F>
double increasing_root(F h) {
  double f_lo = h(0.0);
  if (f_lo >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  double f_hi = h(hi);
  for (int it = 0; it < 200 && f_hi < 0.0; ++it) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = h(hi);
  }
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    double x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = h(x);
    if (fx >= 0.0) {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    } else {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    }
    if (fx == 0.0) break;
  }
  return hi;
}

// Maximizes the augmented Lagrangian of MSP i over its own demand row,
//   U_Fi(b_i) - ((max(0, eta + rho g(b_i)))^2 - eta^2) / (2 rho),
// g(b_i) = sum_j theta_j T_ij - K_i. Stationarity makes each b_ij the
// weighted response at mu = max(0, eta + rho g), so the row optimum is the
// unique root of mu - max(0, eta + rho g(row(mu))), which increases in mu.
Eigen::VectorXd augmented_row(const RowResponse& response, double eta, double rho) {
  const double mu = increasing_root(
      [&](double x) { return x - std::max(0.0, eta + rho * response.slack(x)); });
  return response.row(mu);
}

// Moves an almost-feasible row the last few ulps towards demand_max so the
// delay budget holds exactly.
void restore_feasibility(std::size_t i, const DelayModel& delay, const Scenario& scenario,
                         Eigen::VectorXd& row) {
  const double budget = scenario.msp(i).task.max_delay_s;
  if (delay.expected(scenario, i, row) <= budget) return;
  const Eigen::VectorXd top = Eigen::VectorXd::Constant(row.size(), scenario.demand_max());
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Eigen::VectorXd trial = row + mid * (top - row);
    (delay.expected(scenario, i, trial) <= budget ? hi : lo) = mid;
  }
  row = row + hi * (top - row);
}

}  // namespace

void AdmmConfig::validate() const {
  if (!(damping > 0.0)) throw InvariantError("damping", "must be > 0");
  if (!(stop_threshold > 0.0)) throw InvariantError("stop_threshold", "must be > 0");
  if (!(price_tol > 0.0)) throw InvariantError("price_tol", "must be > 0");
  if (!(inner_tol > 0.0)) throw InvariantError("inner_tol", "must be > 0");
  if (inner_max_iters == 0) throw InvariantError("inner_max_iters", "must be >= 1");
  if (outer_max_iters == 0) throw InvariantError("outer_max_iters", "must be >= 1");
  if (price_grid_points < 64) throw InvariantError("price_grid_points", "must be >= 64");
  if (!(multiplier_init >= 0.0)) throw InvariantError("multiplier_init", "must be >= 0");
  if (!(certification_tol > 0.0)) throw InvariantError("certification_tol", "must be > 0");
}

double msp_best_response(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                         double price, const Scenario& scenario) {
  return std::clamp(interior_response(i, j, demands, price, scenario), 0.0,
                    scenario.demand_max());
}

Eigen::VectorXd constrained_msp_response(std::size_t i, const Eigen::MatrixXd& demands,
                                         const Eigen::VectorXd& prices, const Scenario& scenario) {
  const DelayModel delay(scenario, prices);
  const RowResponse response(i, demands, prices, delay, scenario);
  const Eigen::VectorXd top =
      Eigen::VectorXd::Constant(prices.size(), scenario.demand_max());
  if (delay.expected(scenario, i, top) > scenario.msp(i).task.max_delay_s) return top;
  Eigen::VectorXd row = response.row(increasing_root([&](double mu) { return -response.slack(mu); }));
  restore_feasibility(i, delay, scenario, row);
  return row;
}

FixedPointResult follower_fixed_point(const Eigen::VectorXd& prices, const Eigen::MatrixXd& init,
                                      const Scenario& scenario, double tol,
                                      std::size_t max_iters) {
  FixedPointResult out;
  for (std::size_t i = 0; i < scenario.n_msps(); ++i)
    for (Eigen::Index j = 0; j < prices.size(); ++j)
      if (!(scenario.msp(i).alpha > prices(j))) out.uniqueness_condition = false;

  Eigen::MatrixXd b = init;
  double previous = kInf;
  std::size_t stalled = 0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    Eigen::MatrixXd next = b;
    const Eigen::MatrixXd& source = out.used_gauss_seidel ? next : b;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        next(i, j) = msp_best_response(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                       source, prices(j), scenario);
    const double residual = (next - b).cwiseAbs().maxCoeff();
    b = std::move(next);
    out.iterations = it;
    out.residual = residual;
    if (residual <= tol) {
      out.demands = std::move(b);
      return out;
    }
    stalled = residual >= previous ? stalled + 1 : 0;
    if (stalled >= kStallLimit) out.used_gauss_seidel = true;
    previous = residual;
  }
  throw NoConvergence("follower_fixed_point", max_iters, out.residual, b, prices);
}

FollowerEquilibrium solve_followers(const Eigen::VectorXd& prices, const Scenario& scenario,
                                    const AdmmConfig& config, const FollowerEquilibrium* warm) {
  const auto n = static_cast<Eigen::Index>(scenario.n_msps());
  const auto m = static_cast<Eigen::Index>(scenario.n_mrps());
  const DelayModel delay(scenario, prices);
  const double rho = config.damping;
  const double dmax = scenario.demand_max();

  FollowerEquilibrium out;
  out.demands = warm ? warm->demands : decoupled_start(prices, scenario);
  out.multipliers = warm ? warm->multipliers : Eigen::VectorXd::Constant(n, config.multiplier_init);
  out.delay_infeasible.assign(static_cast<std::size_t>(n), false);

  const Eigen::VectorXd top = Eigen::VectorXd::Constant(m, dmax);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (delay.expected(scenario, ui, top) >= scenario.msp(ui).task.max_delay_s) {
      out.delay_infeasible[ui] = true;
      out.demands.row(i) = top.transpose();
      out.multipliers(i) = 0.0;
    }
  }

  bool gauss_seidel = false;
  double previous = kInf;
  std::size_t stalled = 0;
  for (std::size_t it = 1; it <= config.inner_max_iters; ++it) {
    Eigen::MatrixXd next = out.demands;
    Eigen::VectorXd eta = out.multipliers;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (out.delay_infeasible[ui]) continue;
      const RowResponse response(ui, gauss_seidel ? next : out.demands, prices, delay, scenario);
      const Eigen::VectorXd row = augmented_row(response, out.multipliers(i), rho);
      next.row(i) = row.transpose();
      const double g = delay.expected(scenario, ui, row) - scenario.msp(ui).task.max_delay_s;
      eta(i) = std::max(0.0, out.multipliers(i) + rho * g);
    }
    const double residual = std::max((next - out.demands).cwiseAbs().maxCoeff(),
                                     (eta - out.multipliers).cwiseAbs().maxCoeff());
    out.demands = std::move(next);
    out.multipliers = std::move(eta);
    out.iterations = it;
    out.residual = residual;
    if (residual <= config.inner_tol) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (out.delay_infeasible[ui]) continue;
        Eigen::VectorXd row = out.demands.row(i).transpose();
        restore_feasibility(ui, delay, scenario, row);
        out.demands.row(i) = row.transpose();
      }
      return out;
    }
    stalled = residual >= previous ? stalled + 1 : 0;
    if (stalled >= kStallLimit) gauss_seidel = true;
    previous = residual;
  }
  throw NoConvergence("follower inner loop", config.inner_max_iters, out.residual, out.demands,
                      prices);
}

double reduced_mrp_utility(std::size_t j, double price, const Eigen::VectorXd& prices,
                           const Scenario& scenario, const AdmmConfig& config,
                           const FollowerEquilibrium* warm) {
  StrategyProfile profile;
  profile.prices = prices;
  profile.prices(static_cast<Eigen::Index>(j)) = price;
  profile.demands = solve_followers(profile.prices, scenario, config, warm).demands;
  return mrp_utility(j, profile, scenario);
}

double mrp_best_response_full(std::size_t j, const Eigen::VectorXd& prices,
                              const Scenario& scenario, const AdmmConfig& config,
                              const FollowerEquilibrium* warm) {
  const MrpParams& mrp = scenario.mrp(j);
  if (!(mrp.price_max > mrp.cost)) return mrp.cost;
  const auto objective = [&](double p) {
    return reduced_mrp_utility(j, p, prices, scenario, config, warm);
  };
  return grid_golden_maximize(objective, mrp.cost, mrp.price_max, config.price_grid_points, 1e-10)
      .x;
}

double mrp_best_response(std::size_t j, const Eigen::VectorXd& prices_others,
                         const Scenario& scenario, const AdmmConfig& config) {
  const auto m = static_cast<Eigen::Index>(scenario.n_mrps());
  if (prices_others.size() != m - 1)
    throw InvariantError("prices_others", "length must be M - 1");
  Eigen::VectorXd prices(m);
  for (Eigen::Index l = 0, k = 0; l < m; ++l) {
    if (l == static_cast<Eigen::Index>(j)) {
      prices(l) = scenario.mrp(j).cost;
      continue;
    }
    if (!(prices_others(k) > 0.0)) throw NonPositivePrice(static_cast<std::size_t>(l), prices_others(k));
    prices(l) = prices_others(k++);
  }
  return mrp_best_response_full(j, prices, scenario, config);
}

double DeviationGaps::max() const {
  double out = 0.0;
  if (msp.size() > 0) out = std::max(out, msp.maxCoeff());
  if (mrp.size() > 0) out = std::max(out, mrp.maxCoeff());
  return out;
}

AdmmNoConvergence::AdmmNoConvergence(std::size_t iterations_, double residual_,
                                     std::vector<TraceRecord> trace_)
    : NoConvergence("admm outer loop", iterations_, residual_,
                    trace_.empty() ? Eigen::MatrixXd{} : trace_.back().demands,
                    trace_.empty() ? Eigen::VectorXd{} : trace_.back().prices),
      trace(std::move(trace_)) {}

EquilibriumReport admm_solve(const Scenario& scenario, const AdmmConfig& config) {
  config.validate();
  const auto m = static_cast<Eigen::Index>(scenario.n_mrps());

  Eigen::VectorXd prices(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const MrpParams& mrp = scenario.mrp(static_cast<std::size_t>(j));
    prices(j) = 0.5 * (mrp.cost + mrp.price_max);
  }

  EquilibriumReport report;
  FollowerEquilibrium followers;
  bool have_warm = false;
  double previous_sum = std::numeric_limits<double>::quiet_NaN();
  double last_price_move = kInf;
  bool converged = false;

  for (std::size_t q = 1; q <= config.outer_max_iters; ++q) {
    followers = solve_followers(prices, scenario, config, have_warm ? &followers : nullptr);
    have_warm = true;

    const StrategyProfile current{prices, followers.demands};
    double sum = 0.0;
    for (std::size_t j = 0; j < scenario.n_mrps(); ++j) sum += mrp_utility(j, current, scenario);
    const double stop = q == 1 ? kInf : std::abs(sum - previous_sum);
    report.trace.push_back({q, prices, followers.demands, sum, stop});
    report.outer_iters = q;

    if (stop <= config.stop_threshold && last_price_move <= config.price_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd next(m);
    for (Eigen::Index j = 0; j < m; ++j)
      next(j) = mrp_best_response_full(static_cast<std::size_t>(j), prices, scenario, config,
                                       &followers);
    last_price_move = (next - prices).cwiseAbs().maxCoeff();
    prices = std::move(next);
    previous_sum = sum;
  }
  if (!converged) {
    const double residual = report.trace.empty() ? kInf : report.trace.back().stop_stat;
    throw AdmmNoConvergence(config.outer_max_iters, residual, std::move(report.trace));
  }

  report.profile = {prices, followers.demands};
  report.multipliers = followers.multipliers;
  report.delay_infeasible = followers.delay_infeasible;
  report.msp_utilities.resize(static_cast<Eigen::Index>(scenario.n_msps()));
  report.mrp_utilities.resize(m);
  for (std::size_t i = 0; i < scenario.n_msps(); ++i)
    report.msp_utilities(static_cast<Eigen::Index>(i)) = msp_utility(i, report.profile, scenario);
  for (std::size_t j = 0; j < scenario.n_mrps(); ++j)
    report.mrp_utilities(static_cast<Eigen::Index>(j)) = mrp_utility(j, report.profile, scenario);
  report.social_welfare = report.msp_utilities.sum() + report.mrp_utilities.sum();

  report.deviation_gaps = verify_equilibrium(report.profile, scenario, config.certification_tol,
                                             config.certification_probes, config);
  report.certified = report.deviation_gaps.certified;
  return report;
}

DeviationGaps verify_equilibrium(const StrategyProfile& profile, const Scenario& scenario,
                                 double tol, std::size_t probes, const AdmmConfig& config) {
  validate_profile(profile, scenario);
  const auto n = static_cast<Eigen::Index>(scenario.n_msps());
  const auto m = static_cast<Eigen::Index>(scenario.n_mrps());
  const double dmax = scenario.demand_max();
  const DelayModel delay(scenario, profile.prices);

  DeviationGaps gaps;
  gaps.msp = Eigen::VectorXd::Zero(n);
  gaps.mrp = Eigen::VectorXd::Zero(m);

  constexpr std::size_t kCoordinateGrid = 65;
  const double steps[] = {1e-4, 1e-3, 1e-2, 5e-2, 1e-1};

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double baseline = msp_utility(ui, profile, scenario);
    const Eigen::VectorXd top = Eigen::VectorXd::Constant(m, dmax);
    const double budget =
        std::max(scenario.msp(ui).task.max_delay_s, delay.expected(scenario, ui, top));

    StrategyProfile trial = profile;
    double best = 0.0;
    const auto probe = [&](const Eigen::VectorXd& row) {
      if (delay.expected(scenario, ui, row) > budget + 1e-12) return;
      trial.demands.row(i) = row.transpose();
      best = std::max(best, msp_utility(ui, trial, scenario) - baseline);
    };

    const Eigen::VectorXd own = profile.demands.row(i).transpose();
    RandomStream rng(derive_seed(config.certification_seed, {0, ui}));
    for (std::size_t k = 0; k < probes; ++k) {
      Eigen::VectorXd row(m);
      for (Eigen::Index j = 0; j < m; ++j) row(j) = rng.uniform(0.0, dmax);
      probe(row);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < kCoordinateGrid; ++k) {
        Eigen::VectorXd row = own;
        row(j) = dmax * static_cast<double>(k) / static_cast<double>(kCoordinateGrid - 1);
        probe(row);
      }
      for (double step : steps)
        for (double sign : {-1.0, 1.0}) {
          Eigen::VectorXd row = own;
          row(j) = std::clamp(row(j) + sign * step, 0.0, dmax);
          probe(row);
        }
    }
    Eigen::VectorXd responsive(m);
    for (Eigen::Index j = 0; j < m; ++j)
      responsive(j) = msp_best_response(ui, static_cast<std::size_t>(j), profile.demands,
                                        profile.prices(j), scenario);
    probe(responsive);
    probe(constrained_msp_response(ui, profile.demands, profile.prices, scenario));
    gaps.msp(i) = best;
  }

  const FollowerEquilibrium base = solve_followers(profile.prices, scenario, config);
  const std::size_t grid = 2 * (config.price_grid_points - 1) + 1;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const MrpParams& mrp = scenario.mrp(uj);
    const double baseline = mrp_utility(uj, profile, scenario);
    double best = 0.0;
    const auto probe = [&](double p) {
      const double u = reduced_mrp_utility(uj, p, profile.prices, scenario, config, &base);
      best = std::max(best, u - baseline);
    };
    for (std::size_t k = 0; k < grid; ++k)
      probe(mrp.cost + (mrp.price_max - mrp.cost) * static_cast<double>(k) /
                           static_cast<double>(grid - 1));
    RandomStream rng(derive_seed(config.certification_seed, {1, uj}));
    const std::size_t price_probes = std::min<std::size_t>(probes, 32);
    for (std::size_t k = 0; k < price_probes; ++k) probe(rng.uniform(mrp.cost, mrp.price_max));
    gaps.mrp(j) = best;
  }

  gaps.certified = gaps.max() <= tol;
  return gaps;
}

}  // namespace twinmigrate

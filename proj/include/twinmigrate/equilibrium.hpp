#pragma once

// Follower Nash fixed points, leader best responses and the two-loop ADMM
// scheme for the Stackelberg equilibrium, plus a deviation-gap certificate.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/game_model.hpp"

namespace twinmigrate {

struct AdmmConfig {
  // Penalty coefficient of the augmented Lagrangian (also the multiplier step).
  double damping = 10.0;
  // Outer stop threshold on |sum_j U_Lj^(q) - sum_j U_Lj^(q-1)|.
  double stop_threshold = 1e-4;
  // Outer loop also requires the last price update to move less than this.
  double price_tol = 1e-3;
  double inner_tol = 1e-8;
  std::size_t inner_max_iters = 20000;
  std::size_t outer_max_iters = 200;
  std::size_t price_grid_points = 129;
  double multiplier_init = 0.0;
  double certification_tol = 1e-3;
  std::size_t certification_probes = 256;
  std::uint64_t certification_seed = 0x5eed;

  // Throws InvariantError naming the field.
  void validate() const;
};

// Closed-form follower response: max(0, psi_ij) clipped at demand_max.
double msp_best_response(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                         double price, const Scenario& scenario);

// Exact best response of MSP i under its delay budget, other rows fixed.
// Returns the all-demand_max row when the budget cannot be met.
Eigen::VectorXd constrained_msp_response(std::size_t i, const Eigen::MatrixXd& demands,
                                         const Eigen::VectorXd& prices, const Scenario& scenario);

struct FixedPointResult {
  Eigen::MatrixXd demands;
  std::size_t iterations = 0;
  double residual = 0.0;
  // alpha_i > p_j for all (i, j); uniqueness is only guaranteed when true.
  bool uniqueness_condition = true;
  bool used_gauss_seidel = false;
};

// Synchronous (Jacobi) best-response iteration of the unconstrained follower
// game; switches to Gauss-Seidel sweeps when the residual stops shrinking for
// five consecutive iterations. Throws NoConvergence.
FixedPointResult follower_fixed_point(const Eigen::VectorXd& prices, const Eigen::MatrixXd& init,
                                      const Scenario& scenario, double tol = 1e-8,
                                      std::size_t max_iters = 10000);

// Follower equilibrium under each MSP's expected-delay budget: the ADMM inner
// loop. MSPs whose budget cannot be met even at demand_max are pinned to
// demand_max (their least-violation point) and flagged.
struct FollowerEquilibrium {
  Eigen::MatrixXd demands;
  Eigen::VectorXd multipliers;
  std::vector<bool> delay_infeasible;
  std::size_t iterations = 0;
  double residual = 0.0;
};

FollowerEquilibrium solve_followers(const Eigen::VectorXd& prices, const Scenario& scenario,
                                    const AdmmConfig& config,
                                    const FollowerEquilibrium* warm = nullptr);

// U_Lj when MRP j charges `price`, the other MRPs keep `prices`, and the
// followers re-solve their constrained equilibrium.
double reduced_mrp_utility(std::size_t j, double price, const Eigen::VectorXd& prices,
                           const Scenario& scenario, const AdmmConfig& config,
                           const FollowerEquilibrium* warm = nullptr);

// Maximizes the reduced leader objective over [c_j, p_max]: grid search then
// golden-section on the bracketing cells. Ties go to the lowest price.
double mrp_best_response(std::size_t j, const Eigen::VectorXd& prices_others,
                         const Scenario& scenario, const AdmmConfig& config);

// Same, taking the full price vector (entry j is ignored) and a warm start.
double mrp_best_response_full(std::size_t j, const Eigen::VectorXd& prices,
                              const Scenario& scenario, const AdmmConfig& config,
                              const FollowerEquilibrium* warm = nullptr);

struct TraceRecord {
  std::size_t outer_iter = 0;
  Eigen::VectorXd prices;
  Eigen::MatrixXd demands;
  double mrp_utility_sum = 0.0;
  double stop_stat = 0.0;
};

struct DeviationGaps {
  Eigen::VectorXd msp;  // length N
  Eigen::VectorXd mrp;  // length M
  bool certified = false;

  double max() const;
};

struct EquilibriumReport {
  StrategyProfile profile;
  Eigen::VectorXd msp_utilities;
  Eigen::VectorXd mrp_utilities;
  double social_welfare = 0.0;
  std::size_t outer_iters = 0;
  std::vector<TraceRecord> trace;
  DeviationGaps deviation_gaps;
  bool certified = false;
  Eigen::VectorXd multipliers;
  std::vector<bool> delay_infeasible;
};

class AdmmNoConvergence : public NoConvergence {
 public:
  AdmmNoConvergence(std::size_t iterations, double residual, std::vector<TraceRecord> trace);
  std::vector<TraceRecord> trace;
};

// Two-loop ADMM: followers solve the augmented-Lagrangian inner loop at fixed
// prices, then every MRP best-responds (Jacobi). Terminates when the change in
// summed leader utility is at most `stop_threshold` and prices have settled.
// The returned report is certified with verify_equilibrium.
EquilibriumReport admm_solve(const Scenario& scenario, const AdmmConfig& config = {});

// Unilateral-deviation certificate. MSP deviations: `probes` random demand
// rows plus per-coordinate grids and local steps, restricted to rows meeting
// the MSP's delay budget. MRP deviations: a price grid with followers re-solved.
// Gaps are clamped at zero (the null deviation is always available).
DeviationGaps verify_equilibrium(const StrategyProfile& profile, const Scenario& scenario,
                                 double tol, std::size_t probes, const AdmmConfig& config = {});

}  // namespace twinmigrate

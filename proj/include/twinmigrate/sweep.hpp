#pragma once

// One-parameter sweeps of the equilibrium, averaged over sampled scenarios.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twinmigrate/equilibrium.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

enum class SweepAxis { n_msps, n_mrps, mean_cost, mean_alpha, mean_social, mrp1_cost };

std::string to_string(SweepAxis axis);
// Throws SpecInvalid("axis") for unknown names.
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepConfig {
  SweepAxis axis = SweepAxis::n_msps;
  std::vector<double> values;
  int repeats = 5;  // repeat r samples with seed base.seed + r
  ScenarioSpec base;
  AdmmConfig admm;
  // Costs of MRPs 2.. for the mrp1_cost axis.
  std::vector<double> other_costs;
};

// Default axis values and base spec:
//   n_msps      N = 2..6 with M = 2
//   n_mrps      M = 2..4 with N = 3
//   mean_cost   mu_c = 0.0..0.5 with N = 4, M = 3
//   mean_alpha  mu_alpha in {25, 30, 35} with N = 4, M = 3
//   mean_social mu_w = 4.0..6.0 in steps of 0.5
//   mrp1_cost   c_1 = 0.05..0.6 with c_2 = 0.1, c_3 = 0.5, N = 4
SweepConfig default_sweep(SweepAxis axis);

// Builds the scenario for one (axis value, repeat) pair.
Scenario sweep_scenario(const SweepConfig& config, double value, int repeat);

struct SweepPoint {
  double axis_value = 0.0;
  int converged = 0;
  int failed = 0;  // NoConvergence repeats, excluded from the averages
  int certified = 0;
  // Means over converged repeats. Per-MSP demand is the total sum_j b_ij.
  double avg_msp_demand = 0.0;
  double avg_msp_utility = 0.0;
  double avg_mrp_price = 0.0;
  double avg_mrp_utility = 0.0;
  double social_welfare = 0.0;
  std::vector<double> msp_demand;
  std::vector<double> msp_utility;
  std::vector<double> mrp_price;
  std::vector<double> mrp_utility;
};

SweepPoint run_sweep_point(const SweepConfig& config, double value);
std::vector<SweepPoint> run_sweep(const SweepConfig& config);

// Header: axis_value, avg_msp_demand, avg_msp_utility, avg_mrp_price,
// avg_mrp_utility, social_welfare, msp<i>_demand, msp<i>_utility (i = 1..N),
// mrp<j>_price, mrp<j>_utility (j = 1..M), converged, failed, certified.
// N and M are the largest counts over the points; missing cells are empty.
std::string sweep_csv_header(std::size_t max_msps, std::size_t max_mrps);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace twinmigrate

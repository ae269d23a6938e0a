#pragma once

// Closed-form quantities of the bandwidth market: pairing probabilities,
// radio rate, three-part migration delay, MSP/MRP utilities and their
// analytic derivatives.
//
// Units: bandwidth is carried in internal units of `bandwidth_unit_hz` Hz,
// data in bits, CPU work in cycles, time in seconds.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace twinmigrate {

struct RadioParams {
  double tx_power_dbm = 40.0;
  double channel_gain_db = -20.0;
  double distance_m = 500.0;
  double path_loss_exp = 2.0;
  double noise_power_dbm = -150.0;

  bool operator==(const RadioParams&) const = default;
};

struct MigrationTask {
  double data_size_bits = 0.0;
  double cpu_cycles = 0.0;
  double max_delay_s = 0.0;

  bool operator==(const MigrationTask&) const = default;
};

inline constexpr double kBitsPerMegabyte = 8.0e6;

struct MspParams {
  MigrationTask task;
  double alpha = 0.0;
  double beta = 0.0;
  // Sampled for completeness; the delay model only uses the MRP-side CPU.
  double compute_capability_hz = 0.0;

  bool operator==(const MspParams&) const = default;
};

struct MrpParams {
  double cost = 0.0;
  double arrival_rate = 0.0;
  double service_rate = 0.0;
  double cpu_hz = 0.0;
  double price_max = 0.0;

  bool operator==(const MrpParams&) const = default;
};

// Immutable market instance. The constructor enforces every invariant and
// throws InvariantError naming the offending field.
class Scenario {
 public:
  Scenario(std::vector<MspParams> msps, std::vector<MrpParams> mrps, Eigen::MatrixXd social,
           RadioParams radio, double bandwidth_unit_hz = 1.0e7, double demand_max = 1.0);

  std::size_t n_msps() const { return msps_.size(); }
  std::size_t n_mrps() const { return mrps_.size(); }
  const std::vector<MspParams>& msps() const { return msps_; }
  const std::vector<MrpParams>& mrps() const { return mrps_; }
  const MspParams& msp(std::size_t i) const { return msps_[i]; }
  const MrpParams& mrp(std::size_t j) const { return mrps_[j]; }
  const Eigen::MatrixXd& social() const { return social_; }
  const RadioParams& radio() const { return radio_; }
  double bandwidth_unit_hz() const { return bandwidth_unit_hz_; }
  double demand_max() const { return demand_max_; }

  // Bits per second delivered by one internal bandwidth unit.
  double unit_rate_bps() const { return unit_rate_bps_; }

  Scenario with_mrp_rates(const std::vector<double>& arrival,
                          const std::vector<double>& service) const;
  Scenario with_costs(const std::vector<double>& costs) const;

  bool operator==(const Scenario& other) const;

 private:
  std::vector<MspParams> msps_;
  std::vector<MrpParams> mrps_;
  Eigen::MatrixXd social_;
  RadioParams radio_;
  double bandwidth_unit_hz_;
  double demand_max_;
  double unit_rate_bps_;
};

struct StrategyProfile {
  Eigen::VectorXd prices;   // length M
  Eigen::MatrixXd demands;  // N x M
};

// Throws InvariantError when prices leave [c_j, p_max] or demands leave
// [0, demand_max] (with a 1e-12 slack for round-off).
void validate_profile(const StrategyProfile& profile, const Scenario& scenario);

struct DelayBreakdown {
  double transmission_s = 0.0;
  double queue_s = 0.0;
  double reinstantiation_s = 0.0;
  double total_s = 0.0;
};

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double linear_snr(const RadioParams& radio);
double spectral_efficiency(const RadioParams& radio);  // bits/s/Hz

// theta_j = (1/p_j) / sum_l (1/p_l); the same for every MSP row.
Eigen::VectorXd pairing_probabilities(const Eigen::VectorXd& prices);

double transmission_rate(double bandwidth, const RadioParams& radio, double unit_hz);

// Transmission delay is +inf when the bandwidth is zero.
DelayBreakdown migration_delay(std::size_t i, std::size_t j, double bandwidth,
                               const Scenario& scenario);

// sum_j theta_j T_ij for demand row `demands_row`.
double expected_delay(std::size_t i, const Eigen::VectorXd& theta,
                      const Eigen::Ref<const Eigen::VectorXd>& demands_row,
                      const Scenario& scenario);

bool delay_constraint_met(std::size_t i, const StrategyProfile& profile, const Scenario& scenario);

// sum_{k != i} w_ik b_kj.
double social_pull(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                   const Scenario& scenario);

// psi_ij = (alpha_i + sum_k w_ik b_kj - p_j) / (2 beta_i), before any clipping.
double interior_response(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                         double price, const Scenario& scenario);

double msp_utility(std::size_t i, const StrategyProfile& profile, const Scenario& scenario);
double mrp_utility(std::size_t j, const StrategyProfile& profile, const Scenario& scenario);

Derivatives msp_utility_grad(std::size_t i, std::size_t j, const StrategyProfile& profile,
                             const Scenario& scenario);

// Derivatives of U_Lj in its own price along the follower best-response
// manifold (followers re-solve the demand column as p_j moves). The profile
// must already be at the unconstrained follower best response.
Derivatives mrp_utility_derivs(std::size_t j, const StrategyProfile& profile,
                               const Scenario& scenario);

inline constexpr double kBestResponseCheckTol = 1e-6;

}  // namespace twinmigrate

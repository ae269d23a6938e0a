#include "twinmigrate/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twinmigrate/errors.hpp"

namespace twinmigrate {

namespace {

std::string indexed(const char* group, std::size_t k, const char* field) {
  return std::string(group) + "[" + std::to_string(k) + "]." + field;
}

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvariantError(field, "must be finite and > 0");
}

}  // namespace

Scenario::Scenario(std::vector<MspParams> msps, std::vector<MrpParams> mrps,
                   Eigen::MatrixXd social, RadioParams radio, double bandwidth_unit_hz,
                   double demand_max)
    : msps_(std::move(msps)),
      mrps_(std::move(mrps)),
      social_(std::move(social)),
      radio_(radio),
      bandwidth_unit_hz_(bandwidth_unit_hz),
      demand_max_(demand_max) {
  if (msps_.empty()) throw InvariantError("msps", "at least one MSP is required");
  if (mrps_.empty()) throw InvariantError("mrps", "at least one MRP is required");

  for (std::size_t i = 0; i < msps_.size(); ++i) {
    const MspParams& m = msps_[i];
    require_positive(m.task.data_size_bits, indexed("msps", i, "data_size_bits"));
    require_positive(m.task.cpu_cycles, indexed("msps", i, "cpu_cycles"));
    require_positive(m.task.max_delay_s, indexed("msps", i, "max_delay_s"));
    require_positive(m.alpha, indexed("msps", i, "alpha"));
    require_positive(m.beta, indexed("msps", i, "beta"));
    if (!(m.compute_capability_hz >= 0.0))
      throw InvariantError(indexed("msps", i, "compute_capability_hz"), "must be >= 0");
  }
  for (std::size_t j = 0; j < mrps_.size(); ++j) {
    const MrpParams& r = mrps_[j];
    require_positive(r.cost, indexed("mrps", j, "cost"));
    require_positive(r.arrival_rate, indexed("mrps", j, "arrival_rate"));
    require_positive(r.service_rate, indexed("mrps", j, "service_rate"));
    require_positive(r.cpu_hz, indexed("mrps", j, "cpu_hz"));
    if (!(r.arrival_rate < r.service_rate))
      throw InvariantError(indexed("mrps", j, "arrival_rate"),
                           "MRP " + std::to_string(j) +
                               " violates M/M/1 stability (arrival_rate must be < service_rate)");
    if (!(r.price_max >= r.cost) || !std::isfinite(r.price_max))
      throw InvariantError(indexed("mrps", j, "price_max"), "must be >= cost");
  }

  const auto n = static_cast<Eigen::Index>(msps_.size());
  if (social_.rows() != n || social_.cols() != n)
    throw InvariantError("social", "must be an N x N matrix with N = " + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (social_(i, i) != 0.0) throw InvariantError("social", "diagonal entries must be zero");
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = social_(i, k);
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvariantError("social", "entries must be finite and non-negative");
      if (std::abs(w - social_(k, i)) > 1e-12 * std::max(1.0, std::abs(w)))
        throw InvariantError("social", "matrix must be symmetric");
    }
  }

  require_positive(radio_.distance_m, "radio.distance_m");
  require_positive(radio_.path_loss_exp, "radio.path_loss_exp");
  const double snr = linear_snr(radio_);
  if (!(snr > 0.0) || !std::isfinite(snr))
    throw InvariantError("radio", "linear SNR must be finite and > 0");
  require_positive(bandwidth_unit_hz_, "bandwidth_unit_hz");
  require_positive(demand_max_, "demand_max");
  unit_rate_bps_ = bandwidth_unit_hz_ * spectral_efficiency(radio_);
}

Scenario Scenario::with_mrp_rates(const std::vector<double>& arrival,
                                  const std::vector<double>& service) const {
  std::vector<MrpParams> mrps = mrps_;
  for (std::size_t j = 0; j < mrps.size(); ++j) {
    mrps[j].arrival_rate = arrival.at(j);
    mrps[j].service_rate = service.at(j);
  }
  return Scenario(msps_, std::move(mrps), social_, radio_, bandwidth_unit_hz_, demand_max_);
}

Scenario Scenario::with_costs(const std::vector<double>& costs) const {
  std::vector<MrpParams> mrps = mrps_;
  for (std::size_t j = 0; j < mrps.size(); ++j) mrps[j].cost = costs.at(j);
  return Scenario(msps_, std::move(mrps), social_, radio_, bandwidth_unit_hz_, demand_max_);
}

bool Scenario::operator==(const Scenario& other) const {
  return msps_ == other.msps_ && mrps_ == other.mrps_ && radio_ == other.radio_ &&
         bandwidth_unit_hz_ == other.bandwidth_unit_hz_ && demand_max_ == other.demand_max_ &&
         social_.rows() == other.social_.rows() && social_.cols() == other.social_.cols() &&
         social_ == other.social_;
}

void validate_profile(const StrategyProfile& profile, const Scenario& scenario) {
  constexpr double slack = 1e-12;
  const auto m = static_cast<Eigen::Index>(scenario.n_mrps());
  const auto n = static_cast<Eigen::Index>(scenario.n_msps());
  if (profile.prices.size() != m) throw InvariantError("prices", "length must equal M");
  if (profile.demands.rows() != n || profile.demands.cols() != m)
    throw InvariantError("demands", "must be N x M");
  for (Eigen::Index j = 0; j < m; ++j) {
    const MrpParams& r = scenario.mrp(static_cast<std::size_t>(j));
    const double p = profile.prices(j);
    if (!(p >= r.cost - slack && p <= r.price_max + slack))
      throw InvariantError("prices[" + std::to_string(j) + "]", "outside [cost, price_max]");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double b = profile.demands(i, j);
      if (!(b >= -slack && b <= scenario.demand_max() + slack))
        throw InvariantError(
            "demands[" + std::to_string(i) + "][" + std::to_string(j) + "]",
            "outside [0, demand_max]");
    }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_snr(const RadioParams& radio) {
  return dbm_to_watts(radio.tx_power_dbm) * db_to_linear(radio.channel_gain_db) *
         std::pow(radio.distance_m, -radio.path_loss_exp) / dbm_to_watts(radio.noise_power_dbm);
}

double spectral_efficiency(const RadioParams& radio) { return std::log2(1.0 + linear_snr(radio)); }

Eigen::VectorXd pairing_probabilities(const Eigen::VectorXd& prices) {
  Eigen::VectorXd inv(prices.size());
  for (Eigen::Index j = 0; j < prices.size(); ++j) {
    if (!(prices(j) > 0.0)) throw NonPositivePrice(static_cast<std::size_t>(j), prices(j));
    inv(j) = 1.0 / prices(j);
  }
  return inv / inv.sum();
}

double transmission_rate(double bandwidth, const RadioParams& radio, double unit_hz) {
  if (bandwidth == 0.0) return 0.0;
  return bandwidth * unit_hz * spectral_efficiency(radio);
}

DelayBreakdown migration_delay(std::size_t i, std::size_t j, double bandwidth,
                               const Scenario& scenario) {
  const MspParams& msp = scenario.msp(i);
  const MrpParams& mrp = scenario.mrp(j);
  DelayBreakdown d;
  d.transmission_s = bandwidth > 0.0
                         ? msp.task.data_size_bits / (bandwidth * scenario.unit_rate_bps())
                         : std::numeric_limits<double>::infinity();
  d.queue_s = mrp.arrival_rate / (mrp.service_rate * (mrp.service_rate - mrp.arrival_rate));
  d.reinstantiation_s = msp.task.cpu_cycles / mrp.cpu_hz;
  d.total_s = d.transmission_s + d.queue_s + d.reinstantiation_s;
  return d;
}

double expected_delay(std::size_t i, const Eigen::VectorXd& theta,
                      const Eigen::Ref<const Eigen::VectorXd>& demands_row,
                      const Scenario& scenario) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta(j) == 0.0) continue;
    total += theta(j) * migration_delay(i, static_cast<std::size_t>(j), demands_row(j), scenario)
                            .total_s;
  }
  return total;
}

bool delay_constraint_met(std::size_t i, const StrategyProfile& profile, const Scenario& scenario) {
  const Eigen::VectorXd theta = pairing_probabilities(profile.prices);
  const Eigen::VectorXd row = profile.demands.row(static_cast<Eigen::Index>(i)).transpose();
  return expected_delay(i, theta, row, scenario) <= scenario.msp(i).task.max_delay_s;
}

double social_pull(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                   const Scenario& scenario) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  double s = 0.0;
  for (Eigen::Index k = 0; k < demands.rows(); ++k) {
    if (k == ii) continue;
    s += scenario.social()(ii, k) * demands(k, jj);
  }
  return s;
}

double interior_response(std::size_t i, std::size_t j, const Eigen::MatrixXd& demands,
                         double price, const Scenario& scenario) {
  const MspParams& m = scenario.msp(i);
  return (m.alpha + social_pull(i, j, demands, scenario) - price) / (2.0 * m.beta);
}

double msp_utility(std::size_t i, const StrategyProfile& profile, const Scenario& scenario) {
  const MspParams& m = scenario.msp(i);
  const Eigen::VectorXd theta = pairing_probabilities(profile.prices);
  const auto ii = static_cast<Eigen::Index>(i);
  double u = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double b = profile.demands(ii, j);
    const double s = social_pull(i, static_cast<std::size_t>(j), profile.demands, scenario);
    u += theta(j) * (m.alpha * b - m.beta * b * b + s * b - b * profile.prices(j));
  }
  return u;
}

double mrp_utility(std::size_t j, const StrategyProfile& profile, const Scenario& scenario) {
  const Eigen::VectorXd theta = pairing_probabilities(profile.prices);
  const auto jj = static_cast<Eigen::Index>(j);
  const double margin = profile.prices(jj) - scenario.mrp(j).cost;
  double u = 0.0;
  for (Eigen::Index i = 0; i < profile.demands.rows(); ++i)
    u += theta(jj) * (profile.demands(i, jj) * margin);
  return u;
}

Derivatives msp_utility_grad(std::size_t i, std::size_t j, const StrategyProfile& profile,
                             const Scenario& scenario) {
  const MspParams& m = scenario.msp(i);
  const Eigen::VectorXd theta = pairing_probabilities(profile.prices);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  const double b = profile.demands(ii, jj);
  const double s = social_pull(i, j, profile.demands, scenario);
  return {theta(jj) * (m.alpha - 2.0 * m.beta * b + s - profile.prices(jj)),
          -2.0 * m.beta * theta(jj)};
}

Derivatives mrp_utility_derivs(std::size_t j, const StrategyProfile& profile,
                               const Scenario& scenario) {
  const auto jj = static_cast<Eigen::Index>(j);
  const auto n = profile.demands.rows();
  const double p = profile.prices(jj);
  const double dmax = scenario.demand_max();

  // Free set: MSPs whose response is strictly inside (0, demand_max).
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double psi = interior_response(static_cast<std::size_t>(i), j, profile.demands, p,
                                         scenario);
    const double br = std::clamp(psi, 0.0, dmax);
    const double residual = std::abs(profile.demands(i, jj) - br);
    if (residual > kBestResponseCheckTol)
      throw NotAtFollowerBestResponse(static_cast<std::size_t>(i), j, residual);
    if (psi > 0.0 && psi < dmax) free.push_back(i);
  }

  // On the free set the fixed point satisfies (2 diag(beta) - W) b = alpha + W_clipped b - p,
  // so db/dp = -(2 diag(beta) - W)_FF^{-1} 1.
  double column_slope = 0.0;
  if (!free.empty()) {
    const auto f = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a(f, f);
    for (Eigen::Index r = 0; r < f; ++r)
      for (Eigen::Index c = 0; c < f; ++c)
        a(r, c) = (r == c ? 2.0 * scenario.msp(static_cast<std::size_t>(free[r])).beta : 0.0) -
                  scenario.social()(free[r], free[c]);
    const Eigen::VectorXd slope = -a.partialPivLu().solve(Eigen::VectorXd::Ones(f));
    column_slope = slope.sum();
  }

  double others = 0.0;
  for (Eigen::Index l = 0; l < profile.prices.size(); ++l)
    if (l != jj) others += 1.0 / profile.prices(l);

  const double theta = 1.0 / (1.0 + p * others);
  const double dtheta = -others * theta * theta;
  const double d2theta = 2.0 * others * others * theta * theta * theta;

  const double total = profile.demands.col(jj).sum();
  const double margin = p - scenario.mrp(j).cost;
  const double g = total * margin;
  const double dg = column_slope * margin + total;
  const double d2g = 2.0 * column_slope;

  return {dtheta * g + theta * dg, d2theta * g + 2.0 * dtheta * dg + theta * d2g};
}

}  // namespace twinmigrate

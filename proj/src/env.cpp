#include "twinmigrate/env.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/rng.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

namespace {

// Sub-stream tags, disjoint from the scenario sampler's.
enum Tag : std::uint64_t { kHistory = 101, kRates = 102, kPolicyPrice = 103, kPolicyDemand = 104 };
enum RateField : std::uint64_t { kArrivalDraw = 1, kServiceDraw = 2 };

constexpr double kHuge = 1e300;

bool clip_into(double& x, double lo, double hi) {
  const double y = std::clamp(x, lo, hi);
  const bool changed = y != x;
  x = y;
  return changed;
}

}  // namespace

void EnvConfig::validate() const {
  if (history_len < 1) throw InvariantError("history_len", "must be >= 1");
  if (episode_len < 1) throw InvariantError("episode_len", "must be >= 1");
  if (!(arrival_rate_mean > 0.0)) throw InvariantError("arrival_rate_mean", "must be > 0");
  if (!(service_rate_mean > arrival_rate_mean))
    throw InvariantError("service_rate_mean", "must exceed arrival_rate_mean");
  if (!(arrival_rate_std >= 0.0)) throw InvariantError("arrival_rate_std", "must be >= 0");
  if (!(service_rate_std >= 0.0)) throw InvariantError("service_rate_std", "must be >= 0");
}

std::size_t mrp_observation_length(std::size_t n, std::size_t m, std::size_t history_len) {
  return history_len * (n * m + m) + 2;
}

std::size_t msp_observation_length(std::size_t n, std::size_t m, std::size_t history_len) {
  return history_len * ((n - 1) * m + m);
}

MarketEnv::MarketEnv(Scenario scenario, EnvConfig config)
    : scenario_(std::move(scenario)), config_(config), seed_(config.seed) {
  config_.validate();
}

std::size_t MarketEnv::mrp_observation_length() const {
  return twinmigrate::mrp_observation_length(scenario_.n_msps(), scenario_.n_mrps(),
                                             config_.history_len);
}

std::size_t MarketEnv::msp_observation_length() const {
  return twinmigrate::msp_observation_length(scenario_.n_msps(), scenario_.n_mrps(),
                                             config_.history_len);
}

Observations MarketEnv::reset() { return reset(config_.seed); }

Observations MarketEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  const std::size_t n = scenario_.n_msps();
  const std::size_t m = scenario_.n_mrps();
  RandomStream s(derive_seed(seed, {kHistory}));
  history_.assign(config_.history_len, Snapshot{});
  for (Snapshot& snap : history_) {
    snap.prices.resize(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
      snap.prices(static_cast<Eigen::Index>(j)) =
          s.uniform(scenario_.mrp(j).cost, scenario_.mrp(j).price_max);
    snap.demands.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        snap.demands(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            s.uniform(0.0, scenario_.demand_max());
  }
  arrival_.resize(m);
  service_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    arrival_[j] = scenario_.mrp(j).arrival_rate;
    service_[j] = scenario_.mrp(j).service_rate;
  }
  slot_ = 1;
  done_ = false;
  return observe();
}

void MarketEnv::redraw_rates(std::size_t slot) {
  for (std::size_t j = 0; j < scenario_.n_mrps(); ++j) {
    arrival_[j] = sample_bounded_normal(derive_seed(seed_, {kRates, slot, j, kArrivalDraw}),
                                        config_.arrival_rate_mean, config_.arrival_rate_std, 0.0,
                                        kHuge);
    service_[j] = sample_bounded_normal(derive_seed(seed_, {kRates, slot, j, kServiceDraw}),
                                        config_.service_rate_mean, config_.service_rate_std,
                                        arrival_[j], kHuge);
  }
}

Observations MarketEnv::observe() const {
  const std::size_t n = scenario_.n_msps();
  const std::size_t m = scenario_.n_mrps();
  Observations out;
  for (std::size_t j = 0; j < m; ++j) {
    Observation o{{Role::leader, j}, slot_, {}};
    o.values.reserve(mrp_observation_length());
    for (const Snapshot& snap : history_) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < m; ++l)
          o.values.push_back(snap.demands(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)));
      for (std::size_t l = 0; l < m; ++l) o.values.push_back(snap.prices(static_cast<Eigen::Index>(l)));
    }
    o.values.push_back(arrival_[j]);
    o.values.push_back(service_[j]);
    out.mrp.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Observation o{{Role::follower, i}, slot_, {}};
    o.values.reserve(msp_observation_length());
    for (const Snapshot& snap : history_) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        for (std::size_t l = 0; l < m; ++l)
          o.values.push_back(snap.demands(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
      }
      for (std::size_t l = 0; l < m; ++l) o.values.push_back(snap.prices(static_cast<Eigen::Index>(l)));
    }
    out.msp.push_back(std::move(o));
  }
  return out;
}

Transition MarketEnv::step(const JointAction& actions) {
  if (done_) throw EpisodeFinished();
  const std::size_t n = scenario_.n_msps();
  const std::size_t m = scenario_.n_mrps();
  if (static_cast<std::size_t>(actions.prices.size()) != m)
    throw InvariantError("actions.mrp", "expected one price per MRP");
  if (static_cast<std::size_t>(actions.demands.rows()) != n ||
      static_cast<std::size_t>(actions.demands.cols()) != m)
    throw InvariantError("actions.msp", "expected an N x M demand matrix");
  if (!actions.prices.allFinite()) throw InvariantError("actions.mrp", "prices must be finite");
  if (!actions.demands.allFinite()) throw InvariantError("actions.msp", "demands must be finite");

  Transition tr;
  tr.slot = slot_;
  tr.actions = actions;
  tr.info.price_clipped.assign(m, false);
  tr.info.demand_clipped.assign(n, false);
  for (std::size_t j = 0; j < m; ++j)
    tr.info.price_clipped[j] = clip_into(tr.actions.prices(static_cast<Eigen::Index>(j)),
                                         scenario_.mrp(j).cost, scenario_.mrp(j).price_max);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (clip_into(tr.actions.demands(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                    0.0, scenario_.demand_max()))
        tr.info.demand_clipped[i] = true;

  const Scenario current = scenario_.with_mrp_rates(arrival_, service_);
  const StrategyProfile profile{tr.actions.prices, tr.actions.demands};
  const Eigen::VectorXd theta = pairing_probabilities(profile.prices);

  tr.mrp_rewards.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j)
    tr.mrp_rewards(static_cast<Eigen::Index>(j)) = mrp_utility(j, profile, current);

  tr.msp_rewards.resize(static_cast<Eigen::Index>(n));
  tr.info.delay_met.assign(n, false);
  tr.info.expected_delay_s.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd row = profile.demands.row(static_cast<Eigen::Index>(i)).transpose();
    const double delay = expected_delay(i, theta, row, current);
    const bool met = delay <= current.msp(i).task.max_delay_s;
    tr.info.expected_delay_s[i] = delay;
    tr.info.delay_met[i] = met;
    tr.msp_rewards(static_cast<Eigen::Index>(i)) = met ? msp_utility(i, profile, current) : 0.0;
  }

  history_.erase(history_.begin());
  history_.push_back(Snapshot{profile.prices, profile.demands});
  if (slot_ >= config_.episode_len) {
    done_ = true;
  } else {
    ++slot_;
    if (config_.redraw_rates_each_step) redraw_rates(slot_);
  }
  tr.done = done_;
  tr.observations = observe();
  return tr;
}

RandomPolicy::RandomPolicy(const Scenario& scenario, std::uint64_t seed)
    : n_msps_(scenario.n_msps()), demand_max_(scenario.demand_max()), seed_(seed) {
  for (const MrpParams& r : scenario.mrps()) price_boxes_.emplace_back(r.cost, r.price_max);
}

double RandomPolicy::price(std::size_t j, std::size_t slot) const {
  RandomStream s(derive_seed(seed_, {kPolicyPrice, j, slot}));
  return s.uniform(price_boxes_[j].first, price_boxes_[j].second);
}

Eigen::VectorXd RandomPolicy::demand(std::size_t i, std::size_t slot) const {
  RandomStream s(derive_seed(seed_, {kPolicyDemand, i, slot}));
  Eigen::VectorXd b(static_cast<Eigen::Index>(price_boxes_.size()));
  for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = s.uniform(0.0, demand_max_);
  return b;
}

JointAction RandomPolicy::joint(std::size_t slot) const {
  const auto m = static_cast<Eigen::Index>(price_boxes_.size());
  JointAction a;
  a.prices.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) a.prices(j) = price(static_cast<std::size_t>(j), slot);
  a.demands.resize(static_cast<Eigen::Index>(n_msps_), m);
  for (std::size_t i = 0; i < n_msps_; ++i)
    a.demands.row(static_cast<Eigen::Index>(i)) = demand(i, slot).transpose();
  return a;
}

DegeneratePolicy::DegeneratePolicy(const Scenario& scenario, Role random_role, std::uint64_t seed,
                                   const AdmmConfig& config)
    : scenario_(scenario), random_role_(random_role), random_(scenario, seed), config_(config) {
  if (random_role_ == Role::follower) equilibrium_prices_ = admm_solve(scenario_, config_).profile.prices;
}

JointAction DegeneratePolicy::joint(std::size_t slot) const {
  JointAction a = random_.joint(slot);
  if (random_role_ == Role::follower) {
    a.prices = equilibrium_prices_;
  } else {
    a.demands = solve_followers(a.prices, scenario_, config_).demands;
  }
  return a;
}

DegeneratePolicy degenerate_policy(const Scenario& scenario, Role random_role, std::uint64_t seed,
                                   const AdmmConfig& config) {
  return DegeneratePolicy(scenario, random_role, seed, config);
}

}  // namespace twinmigrate

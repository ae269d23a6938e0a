#pragma once

// The market as a multi-agent POMDP: MRPs (leaders) post prices, MSPs
// (followers) post demand vectors, both roles act every slot and observe an
// L-slot history. MRPs additionally see their own current queue rates.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "twinmigrate/equilibrium.hpp"
#include "twinmigrate/game_model.hpp"

namespace twinmigrate {

enum class Role { leader, follower };

struct AgentId {
  Role role = Role::leader;
  std::size_t index = 0;

  bool operator==(const AgentId&) const = default;
};

struct EnvConfig {
  std::size_t history_len = 3;
  std::size_t episode_len = 100;
  std::uint64_t seed = 0;
  bool redraw_rates_each_step = true;
  // Per-slot queue-rate laws, used when redraw_rates_each_step is set.
  double arrival_rate_mean = 450.0;
  double arrival_rate_std = 20.0;
  double service_rate_mean = 500.0;
  double service_rate_std = 20.0;

  void validate() const;
};

struct Observation {
  AgentId agent;
  std::size_t slot = 0;
  std::vector<double> values;
};

struct Observations {
  std::vector<Observation> mrp;
  std::vector<Observation> msp;
};

struct JointAction {
  Eigen::VectorXd prices;   // one per MRP
  Eigen::MatrixXd demands;  // one row per MSP
};

struct StepInfo {
  std::vector<bool> price_clipped;
  std::vector<bool> demand_clipped;
  std::vector<bool> delay_met;
  std::vector<double> expected_delay_s;
};

struct Transition {
  std::size_t slot = 0;  // the slot the actions were taken in
  Observations observations;  // for the next slot
  JointAction actions;        // after clipping to the action boxes
  Eigen::VectorXd mrp_rewards;
  Eigen::VectorXd msp_rewards;
  bool done = false;
  StepInfo info;
};

std::size_t mrp_observation_length(std::size_t n, std::size_t m, std::size_t history_len);
std::size_t msp_observation_length(std::size_t n, std::size_t m, std::size_t history_len);

class MarketEnv {
 public:
  MarketEnv(Scenario scenario, EnvConfig config);

  // History slots before t = 1 are uniform draws from the action boxes.
  Observations reset();
  Observations reset(std::uint64_t seed);

  // Throws EpisodeFinished once `done` has been returned, until reset.
  Transition step(const JointAction& actions);

  const Scenario& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }
  std::size_t slot() const { return slot_; }
  bool done() const { return done_; }
  const std::vector<double>& arrival_rates() const { return arrival_; }
  const std::vector<double>& service_rates() const { return service_; }
  std::size_t mrp_observation_length() const;
  std::size_t msp_observation_length() const;

 private:
  struct Snapshot {
    Eigen::VectorXd prices;
    Eigen::MatrixXd demands;
  };

  Observations observe() const;
  void redraw_rates(std::size_t slot);

  Scenario scenario_;
  EnvConfig config_;
  std::vector<Snapshot> history_;  // oldest first, length L
  std::vector<double> arrival_;
  std::vector<double> service_;
  std::uint64_t seed_ = 0;
  std::size_t slot_ = 0;
  bool done_ = true;
};

// Uniform over the legal action box; deterministic per (seed, agent, slot).
class RandomPolicy {
 public:
  RandomPolicy(const Scenario& scenario, std::uint64_t seed);
  double price(std::size_t j, std::size_t slot) const;
  Eigen::VectorXd demand(std::size_t i, std::size_t slot) const;
  JointAction joint(std::size_t slot) const;

 private:
  std::vector<std::pair<double, double>> price_boxes_;
  std::size_t n_msps_;
  double demand_max_;
  std::uint64_t seed_;
};

// Scripted baseline in which every agent of `random_role` acts uniformly at
// random. The other side plays its equilibrium strategy: leaders post the
// ADMM equilibrium prices; followers best-respond (delay-constrained) to the
// prices posted in the same slot.
class DegeneratePolicy {
 public:
  DegeneratePolicy(const Scenario& scenario, Role random_role, std::uint64_t seed,
                   const AdmmConfig& config = {});
  JointAction joint(std::size_t slot) const;
  Role random_role() const { return random_role_; }

 private:
  Scenario scenario_;
  Role random_role_;
  RandomPolicy random_;
  AdmmConfig config_;
  Eigen::VectorXd equilibrium_prices_;
};

DegeneratePolicy degenerate_policy(const Scenario& scenario, Role random_role, std::uint64_t seed,
                                   const AdmmConfig& config = {});

}  // namespace twinmigrate

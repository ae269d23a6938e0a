#pragma once

// Deterministic sampling of market instances and the scenario file format.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "twinmigrate/game_model.hpp"

namespace twinmigrate {

// Sampling laws for a market instance. Normal laws are N(mean, std); data
// size and delay budget are uniform on [min, max]. Field names double as CLI
// flag names.
struct ScenarioSpec {
  int n_msps = 3;
  int n_mrps = 2;

  double mean_alpha = 30.0;
  double std_alpha = 1.0;
  double mean_beta = 30.0;
  double std_beta = 1.0;
  double mean_social = 5.0;
  double std_social = 1.0;
  double mean_cost = 0.1;
  double std_cost = 0.05;
  double price_max = 1.5;

  double data_size_mb_min = 10.0;
  double data_size_mb_max = 50.0;
  double cpu_megacycles_mean = 5000.0;
  double cpu_megacycles_std = 500.0;
  double max_delay_s_min = 2.0;
  double max_delay_s_max = 4.0;
  double msp_cpu_ghz_mean = 15.0;
  double msp_cpu_ghz_std = 5.0;

  double arrival_rate_mean = 450.0;
  double arrival_rate_std = 20.0;
  double service_rate_mean = 500.0;
  double service_rate_std = 20.0;
  // The MRP edge-server law reuses the MSP CPU law by default.
  double mrp_cpu_ghz_mean = 15.0;
  double mrp_cpu_ghz_std = 5.0;

  RadioParams radio;
  double bandwidth_unit_hz = 1.0e7;
  double demand_max = 1.0;

  std::uint64_t seed = 0;

  // Throws SpecInvalid naming the field.
  void validate() const;
};

inline constexpr int kMaxResamples = 64;

// Normal draw resampled (up to kMaxResamples times) until it lands in
// (lower, upper]; clamped into that interval otherwise. Exposed for tests.
double sample_bounded_normal(std::uint64_t stream_seed, double mean, double stddev, double lower,
                             double upper);

// Deterministic in spec.seed. Every scalar is drawn from its own sub-stream
// keyed by (seed, entity, index, field), so changing N, M or a mean keeps the
// remaining draws fixed.
Scenario sample_scenario(const ScenarioSpec& spec);

// Three MSPs with alpha = (30, 25, 35), two MRPs with costs (0.3, 0.1), all
// other parameters at the means of the default sampling laws.
Scenario fig3_scenario();

inline constexpr int kScenarioFileVersion = 1;

nlohmann::json scenario_to_json(const Scenario& scenario);
// Throws SchemaError for missing/mistyped fields, InvariantError when the
// values violate a Scenario invariant.
Scenario scenario_from_json(const nlohmann::json& doc);

// Throws ParseError with line/column on malformed input, then as above.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace twinmigrate

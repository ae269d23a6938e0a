#include "twinmigrate/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/rng.hpp"

namespace twinmigrate {

namespace {

// Sub-stream tags. Stable values: changing them changes every sampled scenario.
enum Entity : std::uint64_t { kMsp = 1, kMrp = 2, kTie = 3 };
enum Field : std::uint64_t {
  kDataSize = 1,
  kCycles,
  kBudget,
  kAlpha,
  kBeta,
  kMspCpu,
  kCost,
  kArrival,
  kService,
  kMrpCpu,
  kWeight,
};

void require(bool ok, const char* field, const char* why) {
  if (!ok) throw SpecInvalid(field, why);
}

double uniform_draw(std::uint64_t stream_seed, double lo, double hi) {
  RandomStream s(stream_seed);
  return s.uniform(lo, hi);
}

}  // namespace

void ScenarioSpec::validate() const {
  require(n_msps >= 1, "n_msps", "must be >= 1");
  require(n_mrps >= 1, "n_mrps", "must be >= 1");
  require(mean_alpha > 0.0, "mean_alpha", "must be > 0");
  require(std_alpha >= 0.0, "std_alpha", "must be >= 0");
  require(mean_beta > 0.0, "mean_beta", "must be > 0");
  require(std_beta >= 0.0, "std_beta", "must be >= 0");
  require(mean_social >= 0.0, "mean_social", "must be >= 0");
  require(std_social >= 0.0, "std_social", "must be >= 0");
  require(mean_cost >= 0.0, "mean_cost", "must be >= 0");
  require(std_cost >= 0.0, "std_cost", "must be >= 0");
  require(price_max > 0.0, "price_max", "must be > 0");
  require(mean_cost < price_max, "mean_cost", "must be below price_max");
  require(data_size_mb_min > 0.0, "data_size_mb_min", "must be > 0");
  require(data_size_mb_max >= data_size_mb_min, "data_size_mb_max", "range is empty");
  require(cpu_megacycles_mean > 0.0, "cpu_megacycles_mean", "must be > 0");
  require(cpu_megacycles_std >= 0.0, "cpu_megacycles_std", "must be >= 0");
  require(max_delay_s_min > 0.0, "max_delay_s_min", "must be > 0");
  require(max_delay_s_max >= max_delay_s_min, "max_delay_s_max", "range is empty");
  require(msp_cpu_ghz_mean > 0.0, "msp_cpu_ghz_mean", "must be > 0");
  require(msp_cpu_ghz_std >= 0.0, "msp_cpu_ghz_std", "must be >= 0");
  require(arrival_rate_mean > 0.0, "arrival_rate_mean", "must be > 0");
  require(arrival_rate_std >= 0.0, "arrival_rate_std", "must be >= 0");
  require(service_rate_mean > 0.0, "service_rate_mean", "must be > 0");
  require(service_rate_std >= 0.0, "service_rate_std", "must be >= 0");
  require(service_rate_mean > arrival_rate_mean, "service_rate_mean",
          "must exceed arrival_rate_mean");
  require(mrp_cpu_ghz_mean > 0.0, "mrp_cpu_ghz_mean", "must be > 0");
  require(mrp_cpu_ghz_std >= 0.0, "mrp_cpu_ghz_std", "must be >= 0");
  require(radio.distance_m > 0.0, "distance_m", "must be > 0");
  require(radio.path_loss_exp > 0.0, "path_loss_exp", "must be > 0");
  require(bandwidth_unit_hz > 0.0, "bandwidth_unit_hz", "must be > 0");
  require(demand_max > 0.0, "demand_max", "must be > 0");
}

double sample_bounded_normal(std::uint64_t stream_seed, double mean, double stddev, double lower,
                             double upper) {
  RandomStream s(stream_seed);
  for (int k = 0; k < kMaxResamples; ++k) {
    const double x = s.normal(mean, stddev);
    if (x > lower && x <= upper) return x;
  }
  // Clamp into (lower, upper]; nextafter keeps the strict lower bound.
  return std::clamp(mean, std::nextafter(lower, upper), upper);
}

Scenario sample_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_msps);
  const auto m = static_cast<std::size_t>(spec.n_mrps);
  const std::uint64_t seed = spec.seed;
  const auto key = [seed](Entity e, std::uint64_t a, Field f, std::uint64_t b = 0) {
    return derive_seed(seed, {static_cast<std::uint64_t>(e), a, b, static_cast<std::uint64_t>(f)});
  };
  constexpr double kHuge = 1e300;

  std::vector<MspParams> msps(n);
  for (std::size_t i = 0; i < n; ++i) {
    MspParams& p = msps[i];
    p.task.data_size_bits =
        uniform_draw(key(kMsp, i, kDataSize), spec.data_size_mb_min, spec.data_size_mb_max) *
        kBitsPerMegabyte;
    p.task.cpu_cycles = sample_bounded_normal(key(kMsp, i, kCycles), spec.cpu_megacycles_mean,
                                              spec.cpu_megacycles_std, 0.0, kHuge) *
                        1e6;
    p.task.max_delay_s =
        uniform_draw(key(kMsp, i, kBudget), spec.max_delay_s_min, spec.max_delay_s_max);
    p.alpha = sample_bounded_normal(key(kMsp, i, kAlpha), spec.mean_alpha, spec.std_alpha, 0.0,
                                    kHuge);
    p.beta =
        sample_bounded_normal(key(kMsp, i, kBeta), spec.mean_beta, spec.std_beta, 0.0, kHuge);
    p.compute_capability_hz = sample_bounded_normal(key(kMsp, i, kMspCpu), spec.msp_cpu_ghz_mean,
                                                    spec.msp_cpu_ghz_std, 0.0, kHuge) *
                              1e9;
  }

  std::vector<MrpParams> mrps(m);
  for (std::size_t j = 0; j < m; ++j) {
    MrpParams& r = mrps[j];
    r.price_max = spec.price_max;
    r.cost = sample_bounded_normal(key(kMrp, j, kCost), spec.mean_cost, spec.std_cost, 0.0,
                                   spec.price_max);
    r.arrival_rate = sample_bounded_normal(key(kMrp, j, kArrival), spec.arrival_rate_mean,
                                           spec.arrival_rate_std, 0.0, kHuge);
    // Service rate is resampled until the M/M/1 queue is stable.
    r.service_rate = sample_bounded_normal(key(kMrp, j, kService), spec.service_rate_mean,
                                           spec.service_rate_std, r.arrival_rate, kHuge);
    r.cpu_hz = sample_bounded_normal(key(kMrp, j, kMrpCpu), spec.mrp_cpu_ghz_mean,
                                     spec.mrp_cpu_ghz_std, 0.0, kHuge) *
               1e9;
  }

  Eigen::MatrixXd social = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double w = sample_bounded_normal(key(kTie, i, kWeight, k), spec.mean_social,
                                             spec.std_social, 0.0, kHuge);
      social(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = w;
      social(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = w;
    }

  return Scenario(std::move(msps), std::move(mrps), std::move(social), spec.radio,
                  spec.bandwidth_unit_hz, spec.demand_max);
}

Scenario fig3_scenario() {
  const ScenarioSpec d;
  std::vector<MspParams> msps;
  for (double alpha : {30.0, 25.0, 35.0}) {
    MspParams p;
    p.task.data_size_bits = 0.5 * (d.data_size_mb_min + d.data_size_mb_max) * kBitsPerMegabyte;
    p.task.cpu_cycles = d.cpu_megacycles_mean * 1e6;
    p.task.max_delay_s = 0.5 * (d.max_delay_s_min + d.max_delay_s_max);
    p.alpha = alpha;
    p.beta = d.mean_beta;
    p.compute_capability_hz = d.msp_cpu_ghz_mean * 1e9;
    msps.push_back(p);
  }
  std::vector<MrpParams> mrps;
  for (double cost : {0.3, 0.1}) {
    MrpParams r;
    r.cost = cost;
    r.arrival_rate = d.arrival_rate_mean;
    r.service_rate = d.service_rate_mean;
    r.cpu_hz = d.mrp_cpu_ghz_mean * 1e9;
    r.price_max = d.price_max;
    mrps.push_back(r);
  }
  Eigen::MatrixXd social = Eigen::MatrixXd::Constant(3, 3, d.mean_social);
  social.diagonal().setZero();
  return Scenario(std::move(msps), std::move(mrps), std::move(social), d.radio,
                  d.bandwidth_unit_hz, d.demand_max);
}

}  // namespace twinmigrate

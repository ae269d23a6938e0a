#pragma once

#include <vector>

#include <Eigen/Dense>

#include "twinmigrate/game_model.hpp"

namespace fixtures {

// Homogeneous market: every MSP gets (alpha, beta), every pair the tie w.
// Task and server figures are the sampler's mean values.
inline twinmigrate::Scenario market(int n, int m, double alpha, double beta, double w,
                                    double cost = 0.1, double price_max = 1.5,
                                    double max_delay_s = 3.0, double data_mb = 30.0) {
  using namespace twinmigrate;
  std::vector<MspParams> msps(static_cast<std::size_t>(n));
  for (MspParams& p : msps) {
    p.task.data_size_bits = data_mb * kBitsPerMegabyte;
    p.task.cpu_cycles = 5e9;
    p.task.max_delay_s = max_delay_s;
    p.alpha = alpha;
    p.beta = beta;
    p.compute_capability_hz = 15e9;
  }
  std::vector<MrpParams> mrps(static_cast<std::size_t>(m));
  for (MrpParams& r : mrps) {
    r.cost = cost;
    r.arrival_rate = 450.0;
    r.service_rate = 500.0;
    r.cpu_hz = 15e9;
    r.price_max = price_max;
  }
  Eigen::MatrixXd social = Eigen::MatrixXd::Constant(n, n, w);
  social.diagonal().setZero();
  return Scenario(msps, mrps, social, RadioParams{});
}

// Default radio: 10 W, -20 dB gain, 500 m, exponent 2, -150 dBm noise.
inline double unit_rate_bps() {
  const double snr = 10.0 * 0.01 * std::pow(500.0, -2.0) / 1e-18;
  return 1e7 * std::log2(1.0 + snr);
}

}  // namespace fixtures

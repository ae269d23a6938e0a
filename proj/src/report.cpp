#include "twinmigrate/report.hpp"

#include <ostream>

#include "twinmigrate/csv.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

namespace {

using nlohmann::json;

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

}  // namespace

json report_to_json(const EquilibriumReport& report, const Scenario& scenario) {
  json bools = json::array();
  for (bool b : report.delay_infeasible) bools.push_back(b);
  return {
      {"prices", vec(report.profile.prices)},
      {"demands", mat(report.profile.demands)},
      {"msp_total_demand", vec(report.profile.demands.rowwise().sum())},
      {"msp_utilities", vec(report.msp_utilities)},
      {"mrp_utilities", vec(report.mrp_utilities)},
      {"social_welfare", report.social_welfare},
      {"outer_iters", report.outer_iters},
      {"certified", report.certified},
      {"deviation_gaps",
       {{"msp", vec(report.deviation_gaps.msp)}, {"mrp", vec(report.deviation_gaps.mrp)}}},
      {"multipliers", vec(report.multipliers)},
      {"delay_infeasible", bools},
      {"scenario", scenario_to_json(scenario)},
  };
}

std::string trace_csv_header(std::size_t n, std::size_t m) {
  std::string h = "outer_iter";
  for (std::size_t j = 1; j <= m; ++j) h += ",p_" + std::to_string(j);
  // Indices get a separator once either count reaches two digits.
  const std::string sep = n > 9 || m > 9 ? "_" : "";
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      h += ",b_" + std::to_string(i) + sep + std::to_string(j);
  h += ",U_L_sum,stop_stat";
  return h;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, std::size_t n,
                     std::size_t m) {
  out << trace_csv_header(n, m) << '\n';
  for (const TraceRecord& r : trace) {
    out << r.outer_iter;
    for (Eigen::Index j = 0; j < r.prices.size(); ++j) out << ',' << format_number(r.prices(j));
    for (Eigen::Index i = 0; i < r.demands.rows(); ++i)
      for (Eigen::Index j = 0; j < r.demands.cols(); ++j)
        out << ',' << format_number(r.demands(i, j));
    out << ',' << format_number(r.mrp_utility_sum) << ',' << format_number(r.stop_stat) << '\n';
  }
}

}  // namespace twinmigrate

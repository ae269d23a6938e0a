#include "twinmigrate/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "twinmigrate/csv.hpp"
#include "twinmigrate/errors.hpp"

namespace twinmigrate {

namespace {

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  // Rounded so that 0.05 + 2 * 0.05 prints as 0.15.
  for (int k = 0; k < count; ++k) out.push_back(std::round((lo + step * k) * 1e12) / 1e12);
  return out;
}

int as_count(double value, const char* field) {
  const double r = std::round(value);
  if (std::abs(r - value) > 1e-9 || r < 1)
    throw SpecInvalid(field, "axis value must be a positive integer");
  return static_cast<int>(r);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n_msps: return "n_msps";
    case SweepAxis::n_mrps: return "n_mrps";
    case SweepAxis::mean_cost: return "mean_cost";
    case SweepAxis::mean_alpha: return "mean_alpha";
    case SweepAxis::mean_social: return "mean_social";
    case SweepAxis::mrp1_cost: return "mrp1_cost";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::n_msps, SweepAxis::n_mrps, SweepAxis::mean_cost,
                      SweepAxis::mean_alpha, SweepAxis::mean_social, SweepAxis::mrp1_cost})
    if (to_string(a) == name) return a;
  throw SpecInvalid("axis", "unknown sweep axis '" + name + "'");
}

SweepConfig default_sweep(SweepAxis axis) {
  SweepConfig c;
  c.axis = axis;
  switch (axis) {
    case SweepAxis::n_msps:
      c.base.n_mrps = 2;
      c.values = range(2, 6, 1);
      break;
    case SweepAxis::n_mrps:
      c.base.n_msps = 3;
      c.values = range(2, 4, 1);
      break;
    case SweepAxis::mean_cost:
      c.base.n_msps = 4;
      c.base.n_mrps = 3;
      c.values = range(0.0, 0.5, 0.1);
      break;
    case SweepAxis::mean_alpha:
      c.base.n_msps = 4;
      c.base.n_mrps = 3;
      c.values = {25.0, 30.0, 35.0};
      break;
    case SweepAxis::mean_social:
      c.values = range(4.0, 6.0, 0.5);
      break;
    case SweepAxis::mrp1_cost:
      c.base.n_msps = 4;
      c.base.n_mrps = 3;
      c.other_costs = {0.1, 0.5};
      c.values = range(0.05, 0.6, 0.05);
      break;
  }
  return c;
}

Scenario sweep_scenario(const SweepConfig& config, double value, int repeat) {
  ScenarioSpec spec = config.base;
  spec.seed = config.base.seed + static_cast<std::uint64_t>(repeat);
  switch (config.axis) {
    case SweepAxis::n_msps: spec.n_msps = as_count(value, "n_msps"); break;
    case SweepAxis::n_mrps: spec.n_mrps = as_count(value, "n_mrps"); break;
    case SweepAxis::mean_cost: spec.mean_cost = value; break;
    case SweepAxis::mean_alpha: spec.mean_alpha = value; break;
    case SweepAxis::mean_social: spec.mean_social = value; break;
    case SweepAxis::mrp1_cost: break;
  }
  Scenario scenario = sample_scenario(spec);
  if (config.axis == SweepAxis::mrp1_cost) {
    if (config.other_costs.size() + 1 != scenario.n_mrps())
      throw SpecInvalid("other_costs", "need one cost per MRP after the first");
    std::vector<double> costs{value};
    costs.insert(costs.end(), config.other_costs.begin(), config.other_costs.end());
    scenario = scenario.with_costs(costs);
  }
  return scenario;
}

SweepPoint run_sweep_point(const SweepConfig& config, double value) {
  if (config.repeats < 1) throw SpecInvalid("repeats", "must be >= 1");
  SweepPoint pt;
  pt.axis_value = value;
  std::vector<double> msp_demand, msp_utility, mrp_price, mrp_utility, welfare;
  for (int r = 0; r < config.repeats; ++r) {
    const Scenario scenario = sweep_scenario(config, value, r);
    const std::size_t n = scenario.n_msps();
    const std::size_t m = scenario.n_mrps();
    EquilibriumReport report;
    try {
      report = admm_solve(scenario, config.admm);
    } catch (const NoConvergence&) {
      ++pt.failed;
      continue;
    }
    ++pt.converged;
    if (report.certified) ++pt.certified;
    pt.msp_demand.resize(n, 0.0);
    pt.msp_utility.resize(n, 0.0);
    pt.mrp_price.resize(m, 0.0);
    pt.mrp_utility.resize(m, 0.0);
    const Eigen::VectorXd totals = report.profile.demands.rowwise().sum();
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      pt.msp_demand[i] += totals(ii);
      pt.msp_utility[i] += report.msp_utilities(ii);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      pt.mrp_price[j] += report.profile.prices(jj);
      pt.mrp_utility[j] += report.mrp_utilities(jj);
    }
    msp_demand.push_back(totals.mean());
    msp_utility.push_back(report.msp_utilities.mean());
    mrp_price.push_back(report.profile.prices.mean());
    mrp_utility.push_back(report.mrp_utilities.mean());
    welfare.push_back(report.social_welfare);
  }
  const double k = std::max(1, pt.converged);
  for (auto* v : {&pt.msp_demand, &pt.msp_utility, &pt.mrp_price, &pt.mrp_utility})
    for (double& x : *v) x /= k;
  pt.avg_msp_demand = mean(msp_demand);
  pt.avg_msp_utility = mean(msp_utility);
  pt.avg_mrp_price = mean(mrp_price);
  pt.avg_mrp_utility = mean(mrp_utility);
  pt.social_welfare = mean(welfare);
  return pt;
}

std::vector<SweepPoint> run_sweep(const SweepConfig& config) {
  if (config.values.empty()) throw SpecInvalid("values", "sweep range is empty");
  std::vector<SweepPoint> out;
  for (double v : config.values) out.push_back(run_sweep_point(config, v));
  return out;
}

std::string sweep_csv_header(std::size_t max_msps, std::size_t max_mrps) {
  std::string h =
      "axis_value,avg_msp_demand,avg_msp_utility,avg_mrp_price,avg_mrp_utility,social_welfare";
  for (std::size_t i = 1; i <= max_msps; ++i)
    h += ",msp" + std::to_string(i) + "_demand,msp" + std::to_string(i) + "_utility";
  for (std::size_t j = 1; j <= max_mrps; ++j)
    h += ",mrp" + std::to_string(j) + "_price,mrp" + std::to_string(j) + "_utility";
  h += ",converged,failed,certified";
  return h;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  std::size_t max_n = 0;
  std::size_t max_m = 0;
  for (const SweepPoint& p : points) {
    max_n = std::max(max_n, p.msp_demand.size());
    max_m = std::max(max_m, p.mrp_price.size());
  }
  out << sweep_csv_header(max_n, max_m) << '\n';
  for (const SweepPoint& p : points) {
    const bool any = p.converged > 0;
    const auto cell = [any](double x) { return any ? format_number(x) : std::string(); };
    out << format_number(p.axis_value) << ',' << cell(p.avg_msp_demand) << ','
        << cell(p.avg_msp_utility) << ',' << cell(p.avg_mrp_price) << ','
        << cell(p.avg_mrp_utility) << ',' << cell(p.social_welfare);
    for (std::size_t i = 0; i < max_n; ++i) {
      if (i < p.msp_demand.size())
        out << ',' << format_number(p.msp_demand[i]) << ',' << format_number(p.msp_utility[i]);
      else
        out << ",,";
    }
    for (std::size_t j = 0; j < max_m; ++j) {
      if (j < p.mrp_price.size())
        out << ',' << format_number(p.mrp_price[j]) << ',' << format_number(p.mrp_utility[j]);
      else
        out << ",,";
    }
    out << ',' << p.converged << ',' << p.failed << ',' << p.certified << '\n';
  }
}

}  // namespace twinmigrate

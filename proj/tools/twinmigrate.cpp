// twinmigrate: solve, sweep, check and env-serve subcommands.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twinmigrate/checks.hpp"
#include "twinmigrate/equilibrium.hpp"
#include "twinmigrate/errors.hpp"
#include "twinmigrate/protocol.hpp"
#include "twinmigrate/report.hpp"
#include "twinmigrate/scenario.hpp"
#include "twinmigrate/sweep.hpp"
#include "twinmigrate/transport.hpp"

namespace tw = twinmigrate;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitNotCertified = 3;

struct ScenarioSource {
  std::string path;
  bool fig3 = false;
  tw::ScenarioSpec spec;
};

void add_spec_flags(CLI::App* app, tw::ScenarioSpec& s) {
  app->add_option("--n_msps", s.n_msps);
  app->add_option("--n_mrps", s.n_mrps);
  app->add_option("--mean_alpha", s.mean_alpha);
  app->add_option("--std_alpha", s.std_alpha);
  app->add_option("--mean_beta", s.mean_beta);
  app->add_option("--std_beta", s.std_beta);
  app->add_option("--mean_social", s.mean_social);
  app->add_option("--std_social", s.std_social);
  app->add_option("--mean_cost", s.mean_cost);
  app->add_option("--std_cost", s.std_cost);
  app->add_option("--price_max", s.price_max);
  app->add_option("--data_size_mb_min", s.data_size_mb_min);
  app->add_option("--data_size_mb_max", s.data_size_mb_max);
  app->add_option("--cpu_megacycles_mean", s.cpu_megacycles_mean);
  app->add_option("--cpu_megacycles_std", s.cpu_megacycles_std);
  app->add_option("--max_delay_s_min", s.max_delay_s_min);
  app->add_option("--max_delay_s_max", s.max_delay_s_max);
  app->add_option("--msp_cpu_ghz_mean", s.msp_cpu_ghz_mean);
  app->add_option("--msp_cpu_ghz_std", s.msp_cpu_ghz_std);
  app->add_option("--arrival_rate_mean", s.arrival_rate_mean);
  app->add_option("--arrival_rate_std", s.arrival_rate_std);
  app->add_option("--service_rate_mean", s.service_rate_mean);
  app->add_option("--service_rate_std", s.service_rate_std);
  app->add_option("--mrp_cpu_ghz_mean", s.mrp_cpu_ghz_mean);
  app->add_option("--mrp_cpu_ghz_std", s.mrp_cpu_ghz_std);
  app->add_option("--tx_power_dbm", s.radio.tx_power_dbm);
  app->add_option("--channel_gain_db", s.radio.channel_gain_db);
  app->add_option("--distance_m", s.radio.distance_m);
  app->add_option("--path_loss_exp", s.radio.path_loss_exp);
  app->add_option("--noise_power_dbm", s.radio.noise_power_dbm);
  app->add_option("--bandwidth_unit_hz", s.bandwidth_unit_hz);
  app->add_option("--demand_max", s.demand_max);
  app->add_option("--seed", s.seed, "sampling seed")->envname("TWINMIGRATE_SEED");
}

void add_scenario_flags(CLI::App* app, ScenarioSource& src) {
  auto* file = app->add_option("--scenario", src.path, "scenario JSON file");
  app->add_flag("--fig3", src.fig3, "bundled two-MRP, three-MSP scenario")->excludes(file);
  add_spec_flags(app, src.spec);
}

tw::Scenario load(const ScenarioSource& src) {
  if (src.fig3) return tw::fig3_scenario();
  if (!src.path.empty()) return tw::load_scenario(src.path);
  return tw::sample_scenario(src.spec);
}

void add_admm_flags(CLI::App* app, tw::AdmmConfig& c) {
  app->add_option("--damping", c.damping, "augmented-Lagrangian penalty");
  app->add_option("--stop_threshold", c.stop_threshold);
  app->add_option("--price_tol", c.price_tol);
  app->add_option("--inner_tol", c.inner_tol);
  app->add_option("--inner_max_iters", c.inner_max_iters);
  app->add_option("--outer_max_iters", c.outer_max_iters);
  app->add_option("--price_grid_points", c.price_grid_points);
  app->add_option("--certification_tol", c.certification_tol);
  app->add_option("--certification_probes", c.certification_probes);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw tw::Error("cannot open '" + path + "' for writing");
  return out;
}

void print_summary(std::ostream& out, const tw::EquilibriumReport& r) {
  out << std::setprecision(6);
  out << "prices:";
  for (Eigen::Index j = 0; j < r.profile.prices.size(); ++j) out << ' ' << r.profile.prices(j);
  out << "\ntotal demand:";
  const Eigen::VectorXd totals = r.profile.demands.rowwise().sum();
  for (Eigen::Index i = 0; i < totals.size(); ++i) out << ' ' << totals(i);
  out << "\nMRP utility:";
  for (Eigen::Index j = 0; j < r.mrp_utilities.size(); ++j) out << ' ' << r.mrp_utilities(j);
  out << "\nMSP utility:";
  for (Eigen::Index i = 0; i < r.msp_utilities.size(); ++i) out << ' ' << r.msp_utilities(i);
  out << "\nsocial welfare: " << r.social_welfare << "\nouter iterations: " << r.outer_iters
      << "\nmax deviation gap: " << r.deviation_gaps.max()
      << (r.certified ? " (certified)" : " (NOT certified)") << '\n';
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
    throw tw::SpecInvalid("range", "expected LO:HI:STEP with STEP > 0 and HI >= LO");
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  for (int k = 0; k < count; ++k)
    out.push_back(std::round((parts[0] + parts[2] * k) * 1e12) / 1e12);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg bandwidth market for digital-twin migration"};
  app.require_subcommand(1);

  // solve
  ScenarioSource solve_src;
  tw::AdmmConfig solve_admm;
  std::string report_path = "report.json";
  std::string trace_path = "trace.csv";
  auto* solve = app.add_subcommand("solve", "compute and certify the equilibrium");
  add_scenario_flags(solve, solve_src);
  add_admm_flags(solve, solve_admm);
  solve->add_option("--report", report_path, "report JSON output");
  solve->add_option("--trace", trace_path, "per-iteration CSV output");

  // sweep
  std::string axis_name;
  std::vector<double> values;
  std::string range_text;
  int repeats = 5;
  std::uint64_t sweep_seed = 0;
  std::string sweep_out;
  tw::AdmmConfig sweep_admm;
  auto* sweep = app.add_subcommand("sweep", "average equilibria along one parameter");
  sweep->add_option("--axis", axis_name,
                    "n_msps | n_mrps | mean_cost | mean_alpha | mean_social | mrp1_cost")
      ->required();
  auto* values_opt = sweep->add_option("--values", values, "comma-separated axis values")
                         ->delimiter(',');
  sweep->add_option("--range", range_text, "LO:HI:STEP")->excludes(values_opt);
  sweep->add_option("--repeats", repeats, "seeds averaged per point");
  sweep->add_option("--seed", sweep_seed, "base seed")->envname("TWINMIGRATE_SEED");
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");
  add_admm_flags(sweep, sweep_admm);

  // check
  std::uint64_t check_seed = 0;
  std::optional<std::size_t> check_trials;
  auto* check = app.add_subcommand("check", "run the randomized property suites");
  check->add_option("--seed", check_seed)->envname("TWINMIGRATE_SEED");
  check->add_option("--trials", check_trials, "trials per suite (default: per-suite counts)");

  // env-serve
  ScenarioSource env_src;
  tw::EnvConfig env_cfg;
  std::optional<std::uint64_t> env_seed;
  bool no_redraw = false;
  bool use_stdio = false;
  std::optional<int> tcp_port;
  std::size_t max_connections = 0;
  auto* serve = app.add_subcommand("env-serve", "serve the market environment");
  add_scenario_flags(serve, env_src);
  serve->add_option("--history_len", env_cfg.history_len);
  serve->add_option("--episode_len", env_cfg.episode_len);
  serve->add_option("--env_seed", env_seed, "default reset seed (default: --seed)");
  serve->add_flag("--no_redraw", no_redraw, "keep the scenario's queue rates in every slot");
  auto* stdio_flag = serve->add_flag("--stdio", use_stdio, "line protocol on stdin/stdout (default)");
  serve->add_option("--tcp", tcp_port, "listen on 127.0.0.1:PORT (0 = any free port)")
      ->excludes(stdio_flag)
      ->check(CLI::Range(0, 65535));
  serve->add_option("--max_connections", max_connections, "exit after this many clients (tcp)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      solve_admm.validate();
      const tw::Scenario scenario = load(solve_src);
      tw::EquilibriumReport report;
      try {
        report = tw::admm_solve(scenario, solve_admm);
      } catch (const tw::AdmmNoConvergence& e) {
        auto trace = open_out(trace_path);
        tw::write_trace_csv(trace, e.trace, scenario.n_msps(), scenario.n_mrps());
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
      } catch (const tw::NoConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
      }
      auto rep = open_out(report_path);
      rep << tw::report_to_json(report, scenario).dump(2) << '\n';
      auto trace = open_out(trace_path);
      tw::write_trace_csv(trace, report.trace, scenario.n_msps(), scenario.n_mrps());
      print_summary(std::cout, report);
      return report.certified ? 0 : kExitNotCertified;
    }

    if (*sweep) {
      tw::SweepConfig config = tw::default_sweep(tw::parse_sweep_axis(axis_name));
      if (!values.empty()) config.values = values;
      if (!range_text.empty()) config.values = parse_range(range_text);
      config.repeats = repeats;
      config.base.seed = sweep_seed;
      sweep_admm.validate();
      config.admm = sweep_admm;
      const auto points = tw::run_sweep(config);
      if (sweep_out.empty()) {
        tw::write_sweep_csv(std::cout, points);
      } else {
        auto out = open_out(sweep_out);
        tw::write_sweep_csv(out, points);
      }
      for (const tw::SweepPoint& p : points)
        if (p.failed > 0)
          std::cerr << "warning: " << p.failed << " repeat(s) did not converge at "
                    << tw::to_string(config.axis) << " = " << p.axis_value << '\n';
      return 0;
    }

    if (*check) {
      tw::CheckConfig config;
      config.seed = check_seed;
      if (check_trials) config.set_trials(*check_trials);
      const tw::CheckReport report = tw::run_checks(config);
      tw::print_check_report(std::cout, report);
      if (report.passed()) return 0;
      for (const tw::SuiteResult& r : report.suites)
        if (r.first_failing_seed)
          std::cout << "reproduce " << r.name << ": twinmigrate check --seed "
                    << *r.first_failing_seed << " --trials 1\n";
      return kExitError;
    }

    if (*serve) {
      const tw::Scenario scenario = load(env_src);
      env_cfg.seed = env_seed.value_or(env_src.spec.seed);
      env_cfg.redraw_rates_each_step = !no_redraw;
      // Per-slot redraws follow the same queue-rate laws as the sampler.
      env_cfg.arrival_rate_mean = env_src.spec.arrival_rate_mean;
      env_cfg.arrival_rate_std = env_src.spec.arrival_rate_std;
      env_cfg.service_rate_mean = env_src.spec.service_rate_mean;
      env_cfg.service_rate_std = env_src.spec.service_rate_std;
      env_cfg.validate();
      if (tcp_port) {
        tw::serve_tcp(
            static_cast<std::uint16_t>(*tcp_port),
            [&] { return std::make_unique<tw::Session>(scenario, env_cfg); },
            [](std::uint16_t port) { std::cerr << "listening on 127.0.0.1:" << port << std::endl; },
            max_connections);
      } else {
        tw::Session session(scenario, env_cfg);
        tw::serve_stdio(session);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}

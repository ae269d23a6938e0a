#include <doctest.h>

#include <sstream>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/report.hpp"
#include "twinmigrate/sweep.hpp"

using namespace twinmigrate;

TEST_CASE("sweep CSV header is stable") {
  CHECK(sweep_csv_header(2, 1) ==
        "axis_value,avg_msp_demand,avg_msp_utility,avg_mrp_price,avg_mrp_utility,social_welfare,"
        "msp1_demand,msp1_utility,msp2_demand,msp2_utility,mrp1_price,mrp1_utility,"
        "converged,failed,certified");
}

TEST_CASE("trace CSV header is stable") {
  CHECK(trace_csv_header(2, 2) == "outer_iter,p_1,p_2,b_11,b_12,b_21,b_22,U_L_sum,stop_stat");
  CHECK(trace_csv_header(10, 1).find(",b_10_1,") != std::string::npos);
}

TEST_CASE("axis names") {
  for (const char* name : {"n_msps", "n_mrps", "mean_cost", "mean_alpha", "mean_social", "mrp1_cost"})
    CHECK(to_string(parse_sweep_axis(name)) == name);
  CHECK_THROWS_AS(parse_sweep_axis("beta"), SpecInvalid);
}

TEST_CASE("default axis ranges") {
  CHECK(default_sweep(SweepAxis::n_msps).values == std::vector<double>{2, 3, 4, 5, 6});
  CHECK(default_sweep(SweepAxis::mean_cost).values ==
        std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(default_sweep(SweepAxis::mean_social).values ==
        std::vector<double>{4.0, 4.5, 5.0, 5.5, 6.0});
  const SweepConfig c1 = default_sweep(SweepAxis::mrp1_cost);
  CHECK(c1.values.size() == 12);
  CHECK(c1.values[2] == 0.15);
  CHECK(c1.values.back() == 0.6);
}

TEST_CASE("sweep scenarios vary only the swept quantity") {
  SweepConfig c = default_sweep(SweepAxis::mrp1_cost);
  const Scenario s = sweep_scenario(c, 0.25, 0);
  CHECK(s.mrp(0).cost == 0.25);
  CHECK(s.mrp(1).cost == 0.1);
  CHECK(s.mrp(2).cost == 0.5);
  CHECK(sweep_scenario(c, 0.4, 0).msp(1) == s.msp(1));
  CHECK_FALSE(sweep_scenario(c, 0.25, 1) == s);

  SweepConfig n = default_sweep(SweepAxis::n_msps);
  CHECK(sweep_scenario(n, 4, 0).n_msps() == 4);
  CHECK_THROWS_AS(sweep_scenario(n, 2.5, 0), SpecInvalid);
}

TEST_CASE("sweep point averages and CSV row") {
  SweepConfig c = default_sweep(SweepAxis::n_mrps);
  c.values = {2, 3};
  c.repeats = 2;
  const std::vector<SweepPoint> pts = run_sweep(c);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].converged == 2);
  CHECK(pts[0].failed == 0);
  CHECK(pts[1].mrp_price.size() == 3);
  double mean_price = 0.0;
  for (double p : pts[1].mrp_price) mean_price += p / 3.0;
  CHECK(pts[1].avg_mrp_price == doctest::Approx(mean_price));

  std::ostringstream out;
  write_sweep_csv(out, pts);
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == sweep_csv_header(3, 3));
  std::getline(lines, row);
  // Point with M = 2 leaves the mrp3 cells empty.
  CHECK(row.find(",,,2,0,") != std::string::npos);
}

TEST_CASE("empty sweeps and bad repeats are rejected") {
  SweepConfig c = default_sweep(SweepAxis::n_msps);
  c.values.clear();
  CHECK_THROWS_AS(run_sweep(c), SpecInvalid);
  c = default_sweep(SweepAxis::n_msps);
  c.repeats = 0;
  CHECK_THROWS_AS(run_sweep_point(c, 2), SpecInvalid);
}

TEST_CASE("non-converging repeats are counted and skipped") {
  SweepConfig c = default_sweep(SweepAxis::n_msps);
  c.repeats = 2;
  c.admm.outer_max_iters = 1;
  const SweepPoint p = run_sweep_point(c, 3);
  CHECK(p.failed == 2);
  CHECK(p.converged == 0);
  std::ostringstream out;
  write_sweep_csv(out, {p});
  CHECK(out.str().find("\n3,,,,,,") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "twinmigrate/errors.hpp"
#include "twinmigrate/game_model.hpp"
#include "twinmigrate/rng.hpp"

using namespace twinmigrate;
using doctest::Approx;

TEST_CASE("pairing probabilities are proportional to inverse prices") {
  Eigen::VectorXd p(2);
  p << 0.9, 0.8;
  const Eigen::VectorXd theta = pairing_probabilities(p);
  CHECK(theta(0) == Approx(8.0 / 17.0).epsilon(1e-14));
  CHECK(theta(1) == Approx(9.0 / 17.0).epsilon(1e-14));

  RandomStream rng(4);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd q(1 + t % 6);
    for (Eigen::Index j = 0; j < q.size(); ++j) q(j) = rng.uniform(0.01, 10.0);
    const Eigen::VectorXd th = pairing_probabilities(q);
    CHECK(th.sum() == Approx(1.0).epsilon(1e-12));
    CHECK(th.minCoeff() > 0.0);
    // Cheaper MRPs are paired more often.
    for (Eigen::Index a = 0; a < q.size(); ++a)
      for (Eigen::Index b = 0; b < q.size(); ++b)
        if (q(a) < q(b)) CHECK(th(a) > th(b));
  }
}

TEST_CASE("non-positive price is rejected") {
  Eigen::VectorXd p(2);
  p << 0.5, 0.0;
  CHECK_THROWS_AS(pairing_probabilities(p), NonPositivePrice);
}

TEST_CASE("delay components match hand computation") {
  const Scenario s = fixtures::market(2, 2, 30, 30, 5);
  const double rate = fixtures::unit_rate_bps();
  CHECK(s.unit_rate_bps() == Approx(rate).epsilon(1e-12));
  const DelayBreakdown d = migration_delay(0, 1, 1.5, s);
  CHECK(d.transmission_s == Approx(30 * 8e6 / (1.5 * rate)).epsilon(1e-12));
  CHECK(d.transmission_s == Approx(0.415).epsilon(1e-3));
  CHECK(d.queue_s == Approx(450.0 / (500.0 * 50.0)).epsilon(1e-14));
  CHECK(d.reinstantiation_s == Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(d.total_s == Approx(d.transmission_s + d.queue_s + d.reinstantiation_s));
  CHECK(std::isinf(migration_delay(0, 0, 0.0, s).total_s));
}

TEST_CASE("expected delay weights each MRP by its pairing probability") {
  const Scenario s = fixtures::market(1, 2, 30, 30, 0);
  Eigen::VectorXd theta(2);
  theta << 0.25, 0.75;
  Eigen::VectorXd row(2);
  row << 0.5, 1.0;
  const double want = 0.25 * migration_delay(0, 0, 0.5, s).total_s +
                      0.75 * migration_delay(0, 1, 1.0, s).total_s;
  CHECK(expected_delay(0, theta, row, s) == Approx(want).epsilon(1e-14));
}

TEST_CASE("utilities match hand-expanded sums") {
  const Scenario s = fixtures::market(2, 2, 30, 30, 5, 0.1);
  StrategyProfile prof{Eigen::VectorXd(2), Eigen::MatrixXd(2, 2)};
  prof.prices << 1.0, 0.5;
  prof.demands << 0.5, 0.2, 0.3, 0.4;
  const double t1 = (1.0 / 1.0) / (1.0 / 1.0 + 1.0 / 0.5);
  const double t2 = 1.0 - t1;
  const double uf1 = t1 * (30 * 0.5 - 30 * 0.25 + 5 * 0.3 * 0.5 - 0.5 * 1.0) +
                     t2 * (30 * 0.2 - 30 * 0.04 + 5 * 0.4 * 0.2 - 0.2 * 0.5);
  CHECK(msp_utility(0, prof, s) == Approx(uf1).epsilon(1e-13));
  const double ul2 = t2 * (0.2 + 0.4) * (0.5 - 0.1);
  CHECK(mrp_utility(1, prof, s) == Approx(ul2).epsilon(1e-13));
}

TEST_CASE("MSP gradient is the closed form in b_ij") {
  const Scenario s = fixtures::market(3, 2, 30, 30, 5);
  StrategyProfile prof{Eigen::VectorXd(2), Eigen::MatrixXd(3, 2)};
  prof.prices << 1.2, 0.6;
  prof.demands << 0.5, 0.2, 0.3, 0.4, 0.1, 0.9;
  const Eigen::VectorXd th = pairing_probabilities(prof.prices);
  const Derivatives d = msp_utility_grad(1, 0, prof, s);
  const double pull = 5 * 0.5 + 5 * 0.1;
  CHECK(d.first == Approx(th(0) * (30 - 2 * 30 * 0.3 + pull - 1.2)).epsilon(1e-13));
  CHECK(d.second == Approx(-2 * 30 * th(0)).epsilon(1e-13));
}

TEST_CASE("interior response and its clip") {
  const Scenario s = fixtures::market(2, 1, 30, 30, 5);
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 0.4;
  CHECK(interior_response(0, 0, b, 1.0, s) == Approx((30 + 5 * 0.4 - 1.0) / 60.0));
  CHECK(social_pull(0, 0, b, s) == Approx(2.0));
}

TEST_CASE("leader derivatives in the single-follower case") {
  // U_L(p) = (p - c)(alpha - p) / (2 beta), so U_L' = (alpha - 2p + c) / (2 beta)
  // and U_L'' = -1 / beta.
  const double alpha = 2.0, beta = 1.0, c = 0.2, p = 0.7;
  const Scenario s = fixtures::market(1, 1, alpha, beta, 0, c);
  StrategyProfile prof{Eigen::VectorXd::Constant(1, p),
                       Eigen::MatrixXd::Constant(1, 1, (alpha - p) / (2 * beta))};
  const Derivatives d = mrp_utility_derivs(0, prof, s);
  CHECK(d.first == Approx((alpha - 2 * p + c) / (2 * beta)).epsilon(1e-12));
  CHECK(d.second == Approx(-1.0 / beta).epsilon(1e-12));

  prof.demands(0, 0) += 0.01;
  CHECK_THROWS_AS(mrp_utility_derivs(0, prof, s), NotAtFollowerBestResponse);
}

TEST_CASE("scenario invariants name the offending field") {
  using namespace twinmigrate;
  auto build = [](double arrival) {
    Scenario s = fixtures::market(2, 2, 30, 30, 5);
    std::vector<double> a{450, arrival}, mu{500, 500};
    return s.with_mrp_rates(a, mu);
  };
  CHECK_NOTHROW(build(499));
  try {
    build(500);
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    CHECK(e.field == "mrps[1].arrival_rate");
    CHECK(std::string(e.what()).find("MRP 1") != std::string::npos);
  }

  Scenario base = fixtures::market(2, 2, 30, 30, 5);
  Eigen::MatrixXd asym = base.social();
  asym(0, 1) = 4.0;
  CHECK_THROWS_AS(Scenario(base.msps(), base.mrps(), asym, base.radio()), InvariantError);
  CHECK_THROWS_AS(base.with_costs({0.1, 2.0}), InvariantError);  // cost above price_max
}

TEST_CASE("profile validation enforces the action boxes") {
  const Scenario s = fixtures::market(2, 2, 30, 30, 5);
  StrategyProfile prof{Eigen::VectorXd::Constant(2, 1.0), Eigen::MatrixXd::Constant(2, 2, 0.5)};
  CHECK_NOTHROW(validate_profile(prof, s));
  prof.prices(1) = 1.6;
  CHECK_THROWS_AS(validate_profile(prof, s), InvariantError);
  prof.prices(1) = 1.0;
  prof.demands(1, 0) = -0.1;
  CHECK_THROWS_AS(validate_profile(prof, s), InvariantError);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/rng.hpp"
#include "twinmigrate/scenario.hpp"

using namespace twinmigrate;
using doctest::Approx;

TEST_CASE("random stream is reproducible and seed-sensitive") {
  RandomStream a(9), b(9), c(10);
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(RandomStream(9).uniform() != c.uniform());
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
}

TEST_CASE("normal draws have the requested moments") {
  RandomStream s(123);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double x = s.normal(2.0, 3.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(mean == Approx(2.0).epsilon(0.02));
  CHECK(std::sqrt(sq / n - mean * mean) == Approx(3.0).epsilon(0.02));
}

TEST_CASE("bounded normal stays in its interval") {
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const double x = sample_bounded_normal(k, 0.1, 0.05, 0.0, 1.5);
    CHECK(x > 0.0);
    CHECK(x <= 1.5);
  }
  // Far outside the interval every resample fails, so the draw is clamped.
  const double clamped = sample_bounded_normal(1, -100.0, 0.1, 0.0, 1.0);
  CHECK(clamped > 0.0);
  CHECK(clamped <= 1.0);
}

TEST_CASE("sampling is deterministic per seed") {
  ScenarioSpec spec;
  spec.seed = 11;
  CHECK(sample_scenario(spec) == sample_scenario(spec));
  ScenarioSpec other = spec;
  other.seed = 12;
  CHECK_FALSE(sample_scenario(spec) == sample_scenario(other));
}

TEST_CASE("growing N keeps the existing agents' draws") {
  ScenarioSpec small{.n_msps = 3, .n_mrps = 2, .seed = 4};
  ScenarioSpec big = small;
  big.n_msps = 6;
  const Scenario a = sample_scenario(small);
  const Scenario b = sample_scenario(big);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.msp(i) == b.msp(i));
  for (std::size_t j = 0; j < 2; ++j) CHECK(a.mrp(j) == b.mrp(j));
  CHECK(a.social() == b.social().topLeftCorner(3, 3));
}

TEST_CASE("sampled scenarios satisfy the market invariants") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ScenarioSpec spec{.n_msps = 2 + static_cast<int>(seed % 5), .n_mrps = 2 + static_cast<int>(seed % 3)};
    spec.seed = seed;
    const Scenario s = sample_scenario(spec);
    CHECK(s.social() == s.social().transpose());
    CHECK(s.social().diagonal().isZero());
    CHECK(s.social().minCoeff() >= 0.0);
    for (const MrpParams& r : s.mrps()) {
      CHECK(r.arrival_rate < r.service_rate);
      CHECK(r.cost > 0.0);
      CHECK(r.cost <= r.price_max);
    }
    for (const MspParams& m : s.msps()) {
      CHECK(m.task.data_size_bits >= 10 * kBitsPerMegabyte);
      CHECK(m.task.data_size_bits <= 50 * kBitsPerMegabyte);
      CHECK(m.task.max_delay_s >= 2.0);
      CHECK(m.task.max_delay_s <= 4.0);
    }
  }
}

TEST_CASE("spec validation names the field") {
  ScenarioSpec spec;
  spec.n_mrps = 0;
  try {
    spec.validate();
    FAIL("expected SpecInvalid");
  } catch (const SpecInvalid& e) {
    CHECK(e.field == "n_mrps");
  }
  ScenarioSpec unstable;
  unstable.service_rate_mean = 400.0;
  CHECK_THROWS_AS(sample_scenario(unstable), SpecInvalid);
}

TEST_CASE("bundled two-MRP scenario") {
  const Scenario s = fig3_scenario();
  REQUIRE(s.n_msps() == 3);
  REQUIRE(s.n_mrps() == 2);
  CHECK(s.msp(0).alpha == 30.0);
  CHECK(s.msp(1).alpha == 25.0);
  CHECK(s.msp(2).alpha == 35.0);
  CHECK(s.mrp(0).cost == 0.3);
  CHECK(s.mrp(1).cost == 0.1);
  CHECK(s.social()(0, 1) == 5.0);
}

TEST_CASE("scenario JSON round-trips exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioSpec spec{.n_msps = 4, .n_mrps = 3};
    spec.seed = seed;
    const Scenario s = sample_scenario(spec);
    CHECK(parse_scenario(scenario_to_json(s).dump()) == s);
  }
  const auto path = std::filesystem::temp_directory_path() / "twinmigrate_roundtrip.json";
  save_scenario(fig3_scenario(), path);
  CHECK(load_scenario(path) == fig3_scenario());
  std::filesystem::remove(path);
}

TEST_CASE("malformed scenario files") {
  try {
    parse_scenario("{\n  \"version\": 1,\n  oops\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  nlohmann::json doc = scenario_to_json(fig3_scenario());
  doc["mrps"][1].erase("cost");
  try {
    scenario_from_json(doc);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field == "mrps[1].cost");
  }

  doc = scenario_to_json(fig3_scenario());
  doc["version"] = 2;
  CHECK_THROWS_AS(scenario_from_json(doc), SchemaError);

  doc = scenario_to_json(fig3_scenario());
  doc["mrps"][0]["arrival_rate"] = 600.0;
  CHECK_THROWS_AS(scenario_from_json(doc), InvariantError);

  doc = scenario_to_json(fig3_scenario());
  doc["social"][0] = nlohmann::json::array({0.0, 5.0});
  CHECK_THROWS_AS(scenario_from_json(doc), SchemaError);

  doc = scenario_to_json(fig3_scenario());
  doc["unknown_extra"] = true;
  CHECK_NOTHROW(scenario_from_json(doc));
}

TEST_CASE("bundled scenario file matches the built-in one") {
  CHECK(load_scenario(TWINMIGRATE_DATA_DIR "/fig3.json") == fig3_scenario());
}

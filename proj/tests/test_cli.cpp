#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TWINMIGRATE_BIN + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "twinmigrate_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("solve writes a report and a trace") {
  const fs::path report = scratch("report.json");
  const fs::path trace = scratch("trace.csv");
  const Run r = run("solve --n_msps 3 --n_mrps 2 --seed 4 --report " + report.string() +
                    " --trace " + trace.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("certified") != std::string::npos);
  const nlohmann::json doc = nlohmann::json::parse(slurp(report));
  CHECK(doc["certified"] == true);
  CHECK(doc["prices"].size() == 2);
  CHECK(slurp(trace).rfind("outer_iter,p_1,p_2,b_11,b_12,b_21,b_22,b_31,b_32,U_L_sum,stop_stat\n", 0) == 0);
}

TEST_CASE("solve on a scenario file") {
  const fs::path report = scratch("r2.json");
  const fs::path trace = scratch("t2.csv");
  Run r = run("solve --fig3 --report " + report.string() + " --trace " + trace.string());
  CHECK(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(report));
  const fs::path scen = scratch("scenario.json");
  std::ofstream(scen) << doc["scenario"].dump();
  r = run("solve --scenario " + scen.string() + " --report " + report.string() + " --trace " +
          trace.string());
  CHECK(r.code == 0);
}

TEST_CASE("invalid scenario file exits 1 with the schema error") {
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << R"({"version": 1, "radio": {}})";
  const Run r = run("solve --scenario " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("SchemaError") != std::string::npos);
  CHECK(r.out.find("radio.tx_power_dbm") != std::string::npos);
}

TEST_CASE("invalid spec flag names the field") {
  const Run r = run("solve --n_mrps 0");
  CHECK(r.code == 1);
  CHECK(r.out.find("n_mrps") != std::string::npos);
}

TEST_CASE("hitting the outer cap exits 2") {
  const Run r = run("solve --fig3 --outer_max_iters 1 --report " + scratch("x.json").string() +
                    " --trace " + scratch("x.csv").string());
  CHECK(r.code == 2);
}

TEST_CASE("sweep prints the CSV") {
  const Run r = run("sweep --axis n_mrps --values 2,3 --repeats 1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("axis_value,avg_msp_demand,", 0) == 0);
  const fs::path out = scratch("sweep.csv");
  CHECK(run("sweep --axis mean_social --range 4:5:0.5 --repeats 1 --out " + out.string()).code == 0);
  std::istringstream lines(slurp(out));
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);
  CHECK(run("sweep --axis beta --values 1").code == 1);
}

TEST_CASE("seed falls back to TWINMIGRATE_SEED") {
  const fs::path a = scratch("seed_a.json");
  const fs::path b = scratch("seed_b.json");
  const fs::path t = scratch("seed.csv");
  CHECK(run("solve --report " + a.string() + " --trace " + t.string(), "TWINMIGRATE_SEED=9").code == 0);
  CHECK(run("solve --seed 9 --report " + b.string() + " --trace " + t.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("check lists per-suite trial counts") {
  const Run r = run("check --trials 3 --seed 5");
  CHECK(r.code == 0);
  CHECK(r.out.find("standard_function") != std::string::npos);
  CHECK(r.out.find("trials=3") != std::string::npos);
}

TEST_CASE("env-serve over stdio") {
  const fs::path in = scratch("requests.txt");
  std::ofstream(in) << "{\"type\":\"hello\"}\n{\"type\":\"reset\",\"seed\":7}\n{\"type\":\"close\"}\n";
  const Run r = run("env-serve --fig3 --stdio < " + in.string());
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  const nlohmann::json hello = nlohmann::json::parse(line);
  CHECK(hello["version"] == "1");
  CHECK(hello["N"] == 3);
  CHECK(hello["M"] == 2);
  CHECK(hello["L"] == 3);
}

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <sstream>
#include <thread>

#include "twinmigrate/env.hpp"
#include "twinmigrate/errors.hpp"
#include "twinmigrate/protocol.hpp"
#include "twinmigrate/scenario.hpp"
#include "twinmigrate/transport.hpp"

using namespace twinmigrate;
using nlohmann::json;

namespace {

EnvConfig config(std::size_t len = 100) {
  EnvConfig c;
  c.episode_len = len;
  return c;
}

json ask(Session& s, const std::string& line) { return json::parse(s.handle(line)); }

std::string raw(Session& s, const std::string& line) { return s.handle(line); }

std::string step_line(const JointAction& a) {
  return json{{"type", "step"}, {"actions", actions_to_json(a)}}.dump();
}

}  // namespace

TEST_CASE("hello reports version, dimensions and bounds") {
  Session s(fig3_scenario(), config());
  const json r = ask(s, R"({"type":"hello","version":"1"})");
  CHECK(r["type"] == "hello");
  CHECK(r["version"] == "1");
  CHECK(r["N"] == 3);
  CHECK(r["M"] == 2);
  CHECK(r["L"] == 3);
  CHECK(r["T"] == 100);
  CHECK(r["action_bounds"]["mrp"][0] == json::array({0.3, 1.5}));
  CHECK(r["action_bounds"]["msp"] == json::array({0.0, 1.0}));
  CHECK(r["obs_lengths"]["mrp"] == 26);
  CHECK(r["obs_lengths"]["msp"] == 18);
  CHECK(ask(s, R"({"type":"hello"})")["type"] == "hello");
}

TEST_CASE("version mismatch") {
  Session s(fig3_scenario(), config());
  const json r = ask(s, R"({"type":"hello","version":"2"})");
  CHECK(r["type"] == "error");
  CHECK(r["code"] == "unsupported_version");
}

TEST_CASE("reset with a seed is byte-identical across sessions") {
  Session a(fig3_scenario(), config()), b(fig3_scenario(), config());
  const std::string ra = raw(a, R"({"type":"reset","seed":7})");
  CHECK(ra == raw(b, R"({"type":"reset","seed":7})"));
  CHECK(ra == raw(a, R"({"type":"reset","seed":7})"));
  CHECK(ra != raw(a, R"({"type":"reset","seed":8})"));
  CHECK(json::parse(ra)["type"] == "observations");
  CHECK(ask(a, R"({"type":"reset","seed":-1})")["code"] == "bad_request");
  CHECK(ask(a, R"({"type":"reset","seed":"x"})")["code"] == "bad_request");
}

TEST_CASE("errors keep the session usable") {
  Session s(fig3_scenario(), config(2));
  const JointAction a{Eigen::VectorXd::Constant(2, 1.0), Eigen::MatrixXd::Constant(3, 2, 0.5)};
  CHECK(ask(s, step_line(a))["code"] == "not_reset");
  CHECK(ask(s, "{not json")["code"] == "bad_request");
  CHECK(ask(s, "[1,2]")["code"] == "bad_request");
  CHECK(ask(s, R"({"type":"dance"})")["code"] == "bad_request");
  CHECK(ask(s, R"({"kind":"reset"})")["code"] == "bad_request");
  CHECK(ask(s, R"({"type":"reset","extra":{"ignored":true}})")["type"] == "observations");
  CHECK(ask(s, R"({"type":"step"})")["code"] == "bad_request");
  CHECK(ask(s, R"({"type":"step","actions":{"mrp":[1],"msp":[]}})")["code"] == "bad_request");
  CHECK(ask(s, step_line(a))["done"] == false);
  CHECK(ask(s, step_line(a))["done"] == true);
  CHECK(ask(s, step_line(a))["code"] == "episode_finished");
  CHECK(ask(s, R"({"type":"reset"})")["type"] == "observations");
}

TEST_CASE("step response carries rewards and info") {
  Session s(fig3_scenario(), config());
  ask(s, R"({"type":"reset","seed":1})");
  JointAction a{Eigen::VectorXd(2), Eigen::MatrixXd::Constant(3, 2, 0.5)};
  a.prices << 2.0, 0.8;
  const json r = ask(s, step_line(a));
  CHECK(r["type"] == "step");
  CHECK(r["slot"] == 1);
  CHECK(r["rewards"]["mrp"].size() == 2);
  CHECK(r["rewards"]["msp"].size() == 3);
  CHECK(r["info"]["price_clipped"] == json::array({true, false}));
  CHECK(r["info"]["actions"]["mrp"][0] == 1.5);
  CHECK(r["observations"]["mrp"][0].size() == 26);
}

TEST_CASE("infinite delays are sent as null") {
  Session s(fig3_scenario(), config());
  ask(s, R"({"type":"reset"})");
  const JointAction a{Eigen::VectorXd::Constant(2, 1.0), Eigen::MatrixXd::Zero(3, 2)};
  const json r = ask(s, step_line(a));
  CHECK(r["info"]["expected_delay_s"][0].is_null());
  CHECK(r["info"]["delay_met"][0] == false);
}

TEST_CASE("spec query and close") {
  Session s(fig3_scenario(), config());
  const json r = ask(s, R"({"type":"spec_query"})");
  CHECK(r["type"] == "spec");
  CHECK(scenario_from_json(r["scenario"]) == fig3_scenario());
  CHECK(r["env"]["history_len"] == 3);
  CHECK(ask(s, R"({"type":"close"})")["type"] == "closed");
  CHECK(s.closed());
}

TEST_CASE("action parsing") {
  const JointAction a = actions_from_json(json::parse(R"({"mrp":[1,0.5],"msp":[[0,1],[0.5,0.5]]})"), 2, 2);
  CHECK(a.prices(1) == 0.5);
  CHECK(a.demands(1, 0) == 0.5);
  CHECK_THROWS_AS(actions_from_json(json::parse(R"({"mrp":[1,"x"],"msp":[[0,1],[0,1]]})"), 2, 2), SchemaError);
  CHECK_THROWS_AS(actions_from_json(json::parse(R"({"mrp":[1,1],"msp":[[0,1]]})"), 2, 2), SchemaError);
  CHECK_THROWS_AS(actions_from_json(json::parse(R"({"mrp":[1,1]})"), 2, 2), SchemaError);
}

TEST_CASE("doubles survive the wire exactly") {
  Session s(fig3_scenario(), config());
  ask(s, R"({"type":"reset","seed":5})");
  MarketEnv env(fig3_scenario(), config());
  env.reset(5);
  RandomPolicy pol(fig3_scenario(), 11);
  for (std::size_t t = 1; t <= 20; ++t) {
    const JointAction a = pol.joint(t);
    const json r = ask(s, step_line(a));
    const Transition tr = env.step(a);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(r["rewards"]["msp"][i].get<double>() == tr.msp_rewards(static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(r["rewards"]["mrp"][j].get<double>() == tr.mrp_rewards(static_cast<Eigen::Index>(j)));
    CHECK(r["observations"]["mrp"][1].get<std::vector<double>>() == tr.observations.mrp[1].values);
  }
}

TEST_CASE("stream server answers line by line and skips blank lines") {
  Session s(fig3_scenario(), config());
  std::istringstream in("{\"type\":\"hello\"}\n\n{\"type\":\"reset\",\"seed\":1}\n{\"type\":\"close\"}\n{\"type\":\"hello\"}\n");
  std::ostringstream out;
  serve_stream(in, out, s);
  std::istringstream lines(out.str());
  std::string line;
  std::vector<std::string> types;
  while (std::getline(lines, line)) types.push_back(json::parse(line)["type"]);
  CHECK(types == std::vector<std::string>{"hello", "observations", "closed"});
}

TEST_CASE("TCP transport serves one client per session") {
  std::promise<std::uint16_t> bound;
  std::thread server([&] {
    serve_tcp(
        0, [] { return std::make_unique<Session>(fig3_scenario(), config()); },
        [&](std::uint16_t port) { bound.set_value(port); }, 1);
  });
  const std::uint16_t port = bound.get_future().get();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const std::string req = "{\"type\":\"hello\"}\n{\"type\":\"close\"}\n";
  REQUIRE(::write(fd, req.data(), req.size()) == static_cast<ssize_t>(req.size()));
  std::string got;
  char buf[4096];
  ssize_t k;
  while ((k = ::read(fd, buf, sizeof buf)) > 0) got.append(buf, static_cast<std::size_t>(k));
  ::close(fd);
  server.join();
  std::istringstream lines(got);
  std::string line;
  std::getline(lines, line);
  CHECK(json::parse(line)["M"] == 2);
  std::getline(lines, line);
  CHECK(json::parse(line)["type"] == "closed");
}

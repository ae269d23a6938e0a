#include "twinmigrate/protocol.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <utility>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

using nlohmann::json;

namespace {

json error(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

json flags_json(const std::vector<bool>& flags) {
  json out = json::array();
  for (bool f : flags) out.push_back(f);
  return out;
}

// Infinite delays (an all-zero demand row) have no JSON spelling; sent as null.
json delays_json(const std::vector<double>& delays) {
  json out = json::array();
  for (double d : delays) out.push_back(std::isfinite(d) ? json(d) : json(nullptr));
  return out;
}

double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "expected a number");
  return v.get<double>();
}

}  // namespace

json observations_to_json(const Observations& obs) {
  json mrp = json::array();
  for (const Observation& o : obs.mrp) mrp.push_back(o.values);
  json msp = json::array();
  for (const Observation& o : obs.msp) msp.push_back(o.values);
  return {{"mrp", std::move(mrp)}, {"msp", std::move(msp)}};
}

json actions_to_json(const JointAction& actions) {
  return {{"mrp", vector_json(actions.prices)}, {"msp", matrix_json(actions.demands)}};
}

json transition_to_json(const Transition& tr) {
  json info = {{"price_clipped", flags_json(tr.info.price_clipped)},
               {"demand_clipped", flags_json(tr.info.demand_clipped)},
               {"delay_met", flags_json(tr.info.delay_met)},
               {"expected_delay_s", delays_json(tr.info.expected_delay_s)},
               {"actions", actions_to_json(tr.actions)}};
  return {{"type", "step"},
          {"slot", tr.slot},
          {"observations", observations_to_json(tr.observations)},
          {"rewards", {{"mrp", vector_json(tr.mrp_rewards)}, {"msp", vector_json(tr.msp_rewards)}}},
          {"done", tr.done},
          {"info", std::move(info)}};
}

JointAction actions_from_json(const json& doc, std::size_t n, std::size_t m) {
  if (!doc.is_object()) throw SchemaError("actions", "expected an object");
  if (!doc.contains("mrp") || !doc["mrp"].is_array() || doc["mrp"].size() != m)
    throw SchemaError("actions.mrp", "expected an array of " + std::to_string(m) + " prices");
  if (!doc.contains("msp") || !doc["msp"].is_array() || doc["msp"].size() != n)
    throw SchemaError("actions.msp", "expected an array of " + std::to_string(n) + " rows");
  JointAction a;
  a.prices.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j)
    a.prices(static_cast<Eigen::Index>(j)) =
        number_at(doc["mrp"][j], "actions.mrp[" + std::to_string(j) + "]");
  a.demands.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = doc["msp"][i];
    const std::string field = "actions.msp[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != m)
      throw SchemaError(field, "expected an array of " + std::to_string(m) + " demands");
    for (std::size_t j = 0; j < m; ++j)
      a.demands(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number_at(row[j], field + "[" + std::to_string(j) + "]");
  }
  return a;
}

Session::Session(Scenario scenario, EnvConfig config) : env_(std::move(scenario), config) {}

json Session::hello() const {
  const Scenario& s = env_.scenario();
  json mrp_bounds = json::array();
  for (const MrpParams& r : s.mrps()) mrp_bounds.push_back({r.cost, r.price_max});
  return {{"type", "hello"},
          {"version", kProtocolVersion},
          {"N", s.n_msps()},
          {"M", s.n_mrps()},
          {"L", env_.config().history_len},
          {"T", env_.config().episode_len},
          {"action_bounds", {{"mrp", std::move(mrp_bounds)}, {"msp", {0.0, s.demand_max()}}}},
          {"obs_lengths",
           {{"mrp", env_.mrp_observation_length()}, {"msp", env_.msp_observation_length()}}}};
}

json Session::handle(const json& request) {
  if (!request.is_object()) return error("bad_request", "request must be a JSON object");
  if (!request.contains("type") || !request["type"].is_string())
    return error("bad_request", "missing string field 'type'");
  const std::string type = request["type"].get<std::string>();

  if (type == "hello") {
    if (request.contains("version")) {
      const json& v = request["version"];
      if (!v.is_string() || v.get<std::string>() != kProtocolVersion)
        return error("unsupported_version",
                     "server speaks protocol version " + std::string(kProtocolVersion));
    }
    return hello();
  }
  if (type == "reset") {
    std::uint64_t seed = env_.config().seed;
    if (request.contains("seed")) {
      const json& v = request["seed"];
      if (!v.is_number_unsigned())
        return error("bad_request", "seed must be a non-negative integer");
      seed = v.get<std::uint64_t>();
    }
    const Observations obs = env_.reset(seed);
    started_ = true;
    return {{"type", "observations"},
            {"slot", env_.slot()},
            {"observations", observations_to_json(obs)},
            {"done", false}};
  }
  if (type == "step") {
    if (!started_) return error("not_reset", "send reset before step");
    if (env_.done()) return error("episode_finished", "episode is over; send reset");
    if (!request.contains("actions")) return error("bad_request", "missing field 'actions'");
    try {
      const JointAction actions = actions_from_json(request["actions"], env_.scenario().n_msps(),
                                                    env_.scenario().n_mrps());
      return transition_to_json(env_.step(actions));
    } catch (const SchemaError& e) {
      return error("bad_request", e.what());
    } catch (const InvariantError& e) {
      return error("bad_request", e.what());
    }
  }
  if (type == "spec_query") {
    const EnvConfig& c = env_.config();
    return {{"type", "spec"},
            {"version", kProtocolVersion},
            {"scenario", scenario_to_json(env_.scenario())},
            {"env",
             {{"history_len", c.history_len},
              {"episode_len", c.episode_len},
              {"seed", c.seed},
              {"redraw_rates_each_step", c.redraw_rates_each_step},
              {"arrival_rate_mean", c.arrival_rate_mean},
              {"arrival_rate_std", c.arrival_rate_std},
              {"service_rate_mean", c.service_rate_mean},
              {"service_rate_std", c.service_rate_std}}}};
  }
  if (type == "close") {
    closed_ = true;
    return {{"type", "closed"}};
  }
  return error("bad_request", "unknown request type '" + type + "'");
}

std::string Session::handle(const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error& e) {
    return error("bad_request", std::string("malformed JSON: ") + e.what()).dump();
  }
  return handle(request).dump();
}

void serve_stream(std::istream& in, std::ostream& out, Session& session) {
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << session.handle(line) << '\n';
    out.flush();
  }
}

}  // namespace twinmigrate

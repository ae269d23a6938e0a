#pragma once

// Line-delimited JSON protocol that serves a MarketEnv to an external trainer.
//
// Requests (one JSON object per line, unknown fields ignored):
//   {"type":"hello","version":"1"}
//   {"type":"reset","seed":7}            seed optional
//   {"type":"step","actions":{"mrp":[p_1..p_M],"msp":[[b_11..b_1M],..]}}
//   {"type":"spec_query"}
//   {"type":"close"}
// Every request gets exactly one response line. Errors are
//   {"type":"error","code":...,"message":...}
// with code one of bad_request, unsupported_version, not_reset,
// episode_finished. The connection stays usable after an error.

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "twinmigrate/env.hpp"

namespace twinmigrate {

inline constexpr const char* kProtocolVersion = "1";

nlohmann::json observations_to_json(const Observations& obs);
nlohmann::json transition_to_json(const Transition& tr);
// Parses {"mrp":[...],"msp":[[...]]}; throws SchemaError.
JointAction actions_from_json(const nlohmann::json& doc, std::size_t n, std::size_t m);
nlohmann::json actions_to_json(const JointAction& actions);

class Session {
 public:
  Session(Scenario scenario, EnvConfig config);

  // Handles one request line and returns the response line (no newline).
  std::string handle(const std::string& line);
  nlohmann::json handle(const nlohmann::json& request);

  bool closed() const { return closed_; }
  const MarketEnv& env() const { return env_; }

 private:
  nlohmann::json hello() const;

  MarketEnv env_;
  bool started_ = false;
  bool closed_ = false;
};

// Reads requests until close or end of input, flushing after every response.
void serve_stream(std::istream& in, std::ostream& out, Session& session);

}  // namespace twinmigrate

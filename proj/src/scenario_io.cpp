#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twinmigrate/errors.hpp"
#include "twinmigrate/scenario.hpp"

namespace twinmigrate {

using nlohmann::json;

namespace {

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw SchemaError(path, "must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

double number(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number()) throw SchemaError(path.empty() ? key : path + "." + key, "must be a number");
  return v.get<double>();
}

const json& array(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_array()) throw SchemaError(path.empty() ? key : path + "." + key, "must be an array");
  return v;
}

std::string at(const char* group, std::size_t k) {
  return std::string(group) + "[" + std::to_string(k) + "]";
}

}  // namespace

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["version"] = kScenarioFileVersion;
  doc["bandwidth_unit_hz"] = s.bandwidth_unit_hz();
  doc["demand_max"] = s.demand_max();
  const RadioParams& r = s.radio();
  doc["radio"] = {{"tx_power_dbm", r.tx_power_dbm},
                  {"channel_gain_db", r.channel_gain_db},
                  {"distance_m", r.distance_m},
                  {"path_loss_exp", r.path_loss_exp},
                  {"noise_power_dbm", r.noise_power_dbm}};
  json msps = json::array();
  for (const MspParams& m : s.msps())
    msps.push_back({{"data_size_bits", m.task.data_size_bits},
                    {"cpu_cycles", m.task.cpu_cycles},
                    {"max_delay_s", m.task.max_delay_s},
                    {"alpha", m.alpha},
                    {"beta", m.beta},
                    {"compute_capability_hz", m.compute_capability_hz}});
  doc["msps"] = std::move(msps);
  json mrps = json::array();
  for (const MrpParams& m : s.mrps())
    mrps.push_back({{"cost", m.cost},
                    {"arrival_rate", m.arrival_rate},
                    {"service_rate", m.service_rate},
                    {"cpu_hz", m.cpu_hz},
                    {"price_max", m.price_max}});
  doc["mrps"] = std::move(mrps);
  json social = json::array();
  for (Eigen::Index i = 0; i < s.social().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < s.social().cols(); ++k) row.push_back(s.social()(i, k));
    social.push_back(std::move(row));
  }
  doc["social"] = std::move(social);
  return doc;
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("(root)", "must be an object");
  const json& version = member(doc, "", "version");
  if (!version.is_number_integer() || version.get<int>() != kScenarioFileVersion)
    throw SchemaError("version", "unsupported version (expected " +
                                     std::to_string(kScenarioFileVersion) + ")");

  const json& radio_doc = member(doc, "", "radio");
  RadioParams radio;
  radio.tx_power_dbm = number(radio_doc, "radio", "tx_power_dbm");
  radio.channel_gain_db = number(radio_doc, "radio", "channel_gain_db");
  radio.distance_m = number(radio_doc, "radio", "distance_m");
  radio.path_loss_exp = number(radio_doc, "radio", "path_loss_exp");
  radio.noise_power_dbm = number(radio_doc, "radio", "noise_power_dbm");

  std::vector<MspParams> msps;
  const json& msp_docs = array(doc, "", "msps");
  for (std::size_t i = 0; i < msp_docs.size(); ++i) {
    const std::string path = at("msps", i);
    const json& d = msp_docs[i];
    MspParams m;
    m.task.data_size_bits = number(d, path, "data_size_bits");
    m.task.cpu_cycles = number(d, path, "cpu_cycles");
    m.task.max_delay_s = number(d, path, "max_delay_s");
    m.alpha = number(d, path, "alpha");
    m.beta = number(d, path, "beta");
    m.compute_capability_hz = number(d, path, "compute_capability_hz");
    msps.push_back(m);
  }

  std::vector<MrpParams> mrps;
  const json& mrp_docs = array(doc, "", "mrps");
  for (std::size_t j = 0; j < mrp_docs.size(); ++j) {
    const std::string path = at("mrps", j);
    const json& d = mrp_docs[j];
    MrpParams m;
    m.cost = number(d, path, "cost");
    m.arrival_rate = number(d, path, "arrival_rate");
    m.service_rate = number(d, path, "service_rate");
    m.cpu_hz = number(d, path, "cpu_hz");
    m.price_max = number(d, path, "price_max");
    mrps.push_back(m);
  }

  const json& social_doc = array(doc, "", "social");
  const auto n = static_cast<Eigen::Index>(social_doc.size());
  Eigen::MatrixXd social(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = social_doc[static_cast<std::size_t>(i)];
    const std::string path = at("social", static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw SchemaError(path, "must be an array of length " + std::to_string(n));
    for (Eigen::Index k = 0; k < n; ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw SchemaError(path + "[" + std::to_string(k) + "]", "must be a number");
      social(i, k) = v.get<double>();
    }
  }

  return Scenario(std::move(msps), std::move(mrps), std::move(social), radio,
                  number(doc, "", "bandwidth_unit_hz"), number(doc, "", "demand_max"));
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(line, column, e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

}  // namespace twinmigrate

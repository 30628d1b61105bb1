#include "dronecoal/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dronecoal {

using nlohmann::ordered_json;

namespace {

ordered_json position_json(const Position3D& p) { return ordered_json::array({p.x, p.y, p.z}); }

Position3D position_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("position must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json environment_json(const Environment& e) {
  ordered_json j;
  j["name"] = e.name;
  j["alpha"] = e.alpha;
  j["gamma"] = e.gamma;
  j["k1"] = e.k1;
  j["k2"] = e.k2;
  j["g1"] = e.g1;
  j["g2"] = e.g2;
  j["mu_los_db"] = e.mu_los;
  j["mu_nlos_db"] = e.mu_nlos;
  j["k0_db"] = e.k0_db;
  j["k_half_pi_db"] = e.k_half_pi_db;
  j["theta_min_deg"] = e.theta_min_deg;
  j["carrier_hz"] = e.carrier_hz;
  j["noise_plus_interference_dbm_per_hz"] = e.noise_plus_interference_dbm_per_hz;
  j["antenna_gain_db"] = e.antenna_gain_db;
  j["bandwidth_hz"] = e.bandwidth_hz;
  return j;
}

Environment environment_from(const ordered_json& j) {
  // A bare preset name is accepted as shorthand.
  if (j.is_string()) return environment_preset(j.get<std::string>());
  Environment e;
  if (j.contains("name")) {
    const auto name = j.at("name").get<std::string>();
    try {
      e = environment_preset(name);
    } catch (const std::invalid_argument&) {
      e.name = name;
    }
  }
  const auto field = [&](const char* key, double& target) {
    if (j.contains(key)) target = j.at(key).get<double>();
  };
  field("alpha", e.alpha);
  field("gamma", e.gamma);
  field("k1", e.k1);
  field("k2", e.k2);
  field("g1", e.g1);
  field("g2", e.g2);
  field("mu_los_db", e.mu_los);
  field("mu_nlos_db", e.mu_nlos);
  field("k0_db", e.k0_db);
  field("k_half_pi_db", e.k_half_pi_db);
  field("theta_min_deg", e.theta_min_deg);
  field("carrier_hz", e.carrier_hz);
  field("noise_plus_interference_dbm_per_hz", e.noise_plus_interference_dbm_per_hz);
  field("antenna_gain_db", e.antenna_gain_db);
  field("bandwidth_hz", e.bandwidth_hz);
  validate(e);
  return e;
}

}  // namespace

std::string scenario_to_text(const Scenario& s) {
  ordered_json j;
  j["seed"] = s.seed;
  j["area_m"] = s.area_m;
  j["environment"] = environment_json(s.env);
  ordered_json types = ordered_json::array();
  for (const auto& t : s.type_set) types.push_back({{"id", t.id}, {"mu", t.mu}, {"sigma", t.sigma}});
  j["types"] = types;
  ordered_json drones = ordered_json::array();
  for (const auto& d : s.drones)
    drones.push_back({{"id", d.id},
                      {"position", position_json(d.position)},
                      {"channels", d.channels},
                      {"true_type", d.true_type}});
  j["drones"] = drones;
  ordered_json users = ordered_json::array();
  for (const auto& u : s.users)
    users.push_back({{"id", u.id},
                     {"position", position_json(u.position)},
                     {"baseline_drone", u.baseline_drone}});
  j["users"] = users;
  return j.dump(2) + "\n";
}

Scenario scenario_from_text(const std::string& text) {
  Scenario s;
  try {
    const auto j = ordered_json::parse(text);
    s.seed = j.value("seed", std::uint64_t{0});
    s.area_m = j.value("area_m", 4000.0);
    s.env = environment_from(j.at("environment"));
    for (const auto& t : j.at("types"))
      s.type_set.push_back({t.at("id").get<int>(), t.at("mu").get<double>(),
                            t.at("sigma").get<double>()});
    for (const auto& d : j.at("drones"))
      s.drones.push_back({d.at("id").get<int>(), position_from(d.at("position")),
                          d.at("channels").get<std::vector<int>>(),
                          d.at("true_type").get<int>()});
    for (const auto& u : j.at("users"))
      s.users.push_back({u.at("id").get<int>(), position_from(u.at("position")),
                         u.at("baseline_drone").get<int>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario file: ") + e.what());
  }
  validate(s);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  write_file(path, scenario_to_text(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_text(read_file(path));
}

}  // namespace dronecoal

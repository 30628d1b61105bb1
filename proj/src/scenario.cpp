#include "dronecoal/scenario.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dronecoal/allocation.hpp"
#include "dronecoal/kmeans.hpp"

namespace dronecoal {

namespace {

double parse_double(std::string_view s) {
  // std::from_chars for double is missing from older libstdc++.
  std::string buf(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(buf, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != buf.size() || buf.empty())
    throw std::invalid_argument("type set: bad number '" + buf + "'");
  return v;
}

}  // namespace

TypeSet parse_type_set(std::string_view text) {
  TypeSet types;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw std::invalid_argument("type set: expected mu:sigma, got '" +
                                  std::string(item) + "'");
    types.push_back({static_cast<int>(types.size()) + 1,
                     parse_double(item.substr(0, colon)),
                     parse_double(item.substr(colon + 1))});
    start = end + 1;
  }
  validate(types);
  return types;
}

std::string format_type_set(const TypeSet& types) {
  std::ostringstream os;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i) os << ',';
    os << types[i].mu << ':' << types[i].sigma;
  }
  return os.str();
}

void validate(const TypeSet& types) {
  if (types.empty()) throw std::invalid_argument("type set is empty");
  std::set<int> ids;
  for (const auto& t : types) {
    if (!(t.mu > 0.0) || !(t.sigma > 0.0))
      throw std::invalid_argument("type set: mu and sigma must be positive");
    if (!ids.insert(t.id).second)
      throw std::invalid_argument("type set: duplicate type id");
  }
}

int Scenario::num_channels() const {
  int q = 0;
  for (const auto& d : drones) q += static_cast<int>(d.channels.size());
  return q;
}

int Scenario::type_index(int type_id) const {
  for (std::size_t i = 0; i < type_set.size(); ++i)
    if (type_set[i].id == type_id) return static_cast<int>(i);
  throw std::out_of_range("unknown type id " + std::to_string(type_id));
}

const TypeSpec& Scenario::true_type_of(int drone) const {
  return type_set.at(type_index(drones.at(drone).true_type));
}

void validate(const Scenario& s) {
  validate(s.type_set);
  validate(s.env);
  if (s.drones.empty()) throw std::invalid_argument("scenario has no drones");
  const int q = s.num_channels();
  std::vector<int> seen_channel(q, 0);
  std::vector<int> users_per_drone(s.drones.size(), 0);
  for (int d = 0; d < s.num_drones(); ++d) {
    const auto& drone = s.drones[d];
    if (drone.id != d) throw std::invalid_argument("drone ids must be 0..D-1");
    if (!(drone.position.z > 0.0))
      throw std::invalid_argument("drone altitude must be positive");
    for (int c : drone.channels) {
      if (c < 0 || c >= q || seen_channel[c]++)
        throw std::invalid_argument("channel ownership is not a partition");
    }
    if (std::none_of(s.type_set.begin(), s.type_set.end(),
                     [&](const TypeSpec& t) { return t.id == drone.true_type; }))
      throw std::invalid_argument("drone has an unknown true type");
  }
  for (int n = 0; n < s.num_users(); ++n) {
    const auto& user = s.users[n];
    if (user.id != n) throw std::invalid_argument("user ids must be 0..N-1");
    if (user.position.z < 0.0)
      throw std::invalid_argument("user altitude must be non-negative");
    if (user.baseline_drone < 0 || user.baseline_drone >= s.num_drones())
      throw std::invalid_argument("user associated with unknown drone");
    ++users_per_drone[user.baseline_drone];
  }
  for (int d = 0; d < s.num_drones(); ++d) {
    if (users_per_drone[d] > static_cast<int>(s.drones[d].channels.size()))
      throw std::invalid_argument("drone serves more users than it has channels");
  }
}

const std::vector<SimulationSetting>& standard_settings() {
  static const std::vector<SimulationSetting> settings = {
      {"S1", 3, 9, 9, 3, 3},
      {"S2", 4, 12, 12, 3, 3},
      {"S3", 5, 15, 15, 3, 3},
      {"S4", 6, 18, 18, 3, 3},
  };
  return settings;
}

SimulationSetting setting_by_name(std::string_view name) {
  for (const auto& s : standard_settings())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown simulation setting '" +
                              std::string(name) + "'");
}

Scenario generate(const SimulationSetting& setting, const Environment& env,
                  const TypeSet& types, std::uint64_t seed,
                  const GenerationOptions& options) {
  if (setting.drones < 1 ||
      setting.drones * setting.users_per_drone != setting.users ||
      setting.drones * setting.channels_per_drone != setting.channels ||
      setting.users_per_drone > setting.channels_per_drone)
    throw std::invalid_argument("simulation setting '" + setting.name +
                                "' has inconsistent counts");
  validate(types);
  validate(env);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, options.area_m);
  std::vector<Point2D> points(setting.users);
  for (auto& p : points) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  const auto clusters = kmeans_placement(points, setting.drones, rng(),
                                         setting.users_per_drone);

  Scenario s;
  s.type_set = types;
  s.env = env;
  s.area_m = options.area_m;
  s.seed = seed;
  std::uniform_int_distribution<std::size_t> pick_type(0, types.size() - 1);
  for (int d = 0; d < setting.drones; ++d) {
    DroneSite drone;
    drone.id = d;
    drone.position = {clusters.centroids[d].x, clusters.centroids[d].y,
                      options.altitude_m};
    for (int c = 0; c < setting.channels_per_drone; ++c)
      drone.channels.push_back(d * setting.channels_per_drone + c);
    drone.true_type = types[pick_type(rng)].id;
    s.drones.push_back(std::move(drone));
  }
  for (int n = 0; n < setting.users; ++n)
    s.users.push_back({n, {points[n].x, points[n].y, 0.0}, clusters.assignment[n]});
  validate(s);
  return s;
}

std::vector<double> baseline_rates(const Scenario& scenario) {
  std::vector<double> rates(scenario.num_drones(), 0.0);
  for (int d = 0; d < scenario.num_drones(); ++d) {
    const std::vector<int> self{d};
    const std::vector<double> power{scenario.true_power(d)};
    rates[d] = evaluate_coalition(self, scenario, power).total_rate;
  }
  return rates;
}

}  // namespace dronecoal

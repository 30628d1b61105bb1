#pragma once

#include <utility>
#include <vector>

#include "dronecoal/scenario.hpp"

namespace fixtures {

struct DroneSpec {
  double x, y;
  int channels;
  int true_type;  // type id
};

struct UserSpec {
  double x, y;
  int owner;
};

// Hand-built scenario: drones at 1000 m, channels numbered in drone order.
inline dronecoal::Scenario build(const std::vector<DroneSpec>& drones,
                                 const std::vector<UserSpec>& users,
                                 dronecoal::TypeSet types = {{1, 12.0, 3.0}, {2, 18.0, 3.0}},
                                 dronecoal::Environment env = dronecoal::urban()) {
  dronecoal::Scenario s;
  s.type_set = std::move(types);
  s.env = std::move(env);
  int channel = 0;
  for (std::size_t d = 0; d < drones.size(); ++d) {
    dronecoal::DroneSite site;
    site.id = static_cast<int>(d);
    site.position = {drones[d].x, drones[d].y, 1000.0};
    for (int q = 0; q < drones[d].channels; ++q) site.channels.push_back(channel++);
    site.true_type = drones[d].true_type;
    s.drones.push_back(site);
  }
  for (std::size_t u = 0; u < users.size(); ++u)
    s.users.push_back({static_cast<int>(u), {users[u].x, users[u].y, 0.0}, users[u].owner});
  dronecoal::validate(s);
  return s;
}

inline dronecoal::Scenario seeded(const char* setting, std::uint64_t seed,
                                  const char* types = "12:3,18:3") {
  return dronecoal::generate(dronecoal::setting_by_name(setting), dronecoal::urban(),
                             dronecoal::parse_type_set(types), seed);
}

// Bell numbers from the triangle recurrence, independent of the enumerator.
inline std::vector<long long> bell_numbers(int n) {
  std::vector<long long> bell{1};
  std::vector<long long> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<long long> next{row.back()};
    for (long long v : row) next.push_back(next.back() + v);
    bell.push_back(next.front());
    row = std::move(next);
  }
  return bell;
}

}  // namespace fixtures

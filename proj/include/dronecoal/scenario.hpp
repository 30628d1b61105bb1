#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dronecoal/propagation.hpp"

namespace dronecoal {

/// A drone's power distribution; mu is the usable power budget in Watts.
struct TypeSpec {
  int id = 0;
  double mu = 0.0;
  double sigma = 0.0;

  friend bool operator==(const TypeSpec&, const TypeSpec&) = default;
};

using TypeSet = std::vector<TypeSpec>;

/// Parses "12:3,18:3" into types with ids 1, 2, ...
TypeSet parse_type_set(std::string_view text);
std::string format_type_set(const TypeSet& types);
void validate(const TypeSet& types);

struct DroneSite {
  int id = 0;
  Position3D position;
  std::vector<int> channels;
  int true_type = 0;  // TypeSpec id

  friend bool operator==(const DroneSite&, const DroneSite&) = default;
};

struct UserSite {
  int id = 0;
  Position3D position;
  int baseline_drone = 0;

  friend bool operator==(const UserSite&, const UserSite&) = default;
};

/// One immutable network instance. Drone, user and channel ids are dense
/// indices starting at 0.
struct Scenario {
  std::vector<DroneSite> drones;
  std::vector<UserSite> users;
  TypeSet type_set;
  Environment env;
  double area_m = 4000.0;
  std::uint64_t seed = 0;

  int num_drones() const { return static_cast<int>(drones.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  int num_channels() const;
  /// Position of the type id inside type_set.
  int type_index(int type_id) const;
  const TypeSpec& true_type_of(int drone) const;
  double true_power(int drone) const { return true_type_of(drone).mu; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws std::invalid_argument when ownership, association or type
/// references are inconsistent.
void validate(const Scenario& scenario);

struct SimulationSetting {
  std::string name;
  int drones = 0;
  int channels = 0;
  int users = 0;
  int users_per_drone = 0;
  int channels_per_drone = 0;

  friend bool operator==(const SimulationSetting&, const SimulationSetting&) = default;
};

/// S1..S4 of the reference experiments.
const std::vector<SimulationSetting>& standard_settings();
SimulationSetting setting_by_name(std::string_view name);

struct GenerationOptions {
  double area_m = 4000.0;
  double altitude_m = 1000.0;
};

/// Uniform users, capacity-repaired k-means drone placement, contiguous
/// channel blocks per drone and uniformly drawn true types.
Scenario generate(const SimulationSetting& setting, const Environment& env,
                  const TypeSet& types, std::uint64_t seed,
                  const GenerationOptions& options = {});

/// Per-drone rate when every drone serves only its own users with its own
/// channels and its true expected power.
std::vector<double> baseline_rates(const Scenario& scenario);

}  // namespace dronecoal

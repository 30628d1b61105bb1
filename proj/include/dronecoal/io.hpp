#pragma once

#include <filesystem>
#include <string>

#include "dronecoal/scenario.hpp"

namespace dronecoal {

/// Pretty-printed JSON holding every Scenario field. Doubles are written in
/// shortest round-trip form, so load(save(s)) == s bit for bit.
std::string scenario_to_text(const Scenario& scenario);
/// Throws std::invalid_argument on malformed or inconsistent input.
Scenario scenario_from_text(const std::string& text);

void save_scenario(const std::filesystem::path& path, const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace dronecoal

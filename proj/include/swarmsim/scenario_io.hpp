#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsim/core.hpp"

namespace swarmsim {

/// Parse a scenario document. Angles arrive in degrees, everything else in SI
/// units. The result is validated.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Apply a dotted-path assignment such as "noise.shadowing_std_db=1.5". The
/// path must already exist in the document, or in `schema` when given. The
/// value is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment, const nlohmann::json* schema = nullptr);

nlohmann::json read_json_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);

}  // namespace swarmsim

#pragma once

#include <filesystem>
#include <json.hpp>

#include "walklearn/engine.hpp"

namespace walklearn {

// JSON form of RunConfig. Unknown keys are rejected so typos surface as
// ConfigError instead of silently falling back to defaults.
RunConfig run_config_from_json(const nlohmann::json& doc, bool require_data = true);
nlohmann::json to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace walklearn

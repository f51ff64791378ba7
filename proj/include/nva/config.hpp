#pragma once

#include "nva/bench.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nva {

// Configuration problem; key() names the offending entry when there is one.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& c);

std::vector<std::string> preset_ids();
// Experiments expanded from a named recipe; ConfigError for unknown names.
std::vector<ExperimentConfig> preset(const std::string& name);

}  // namespace nva

#ifndef CADMM_CONFIG_IO_HPP
#define CADMM_CONFIG_IO_HPP

#include <map>
#include <string>

#include "cadmm/scenario.hpp"

namespace cadmm {

/// Raw sectioned key/value view of a config file. Lines are either blank,
/// full-line comments starting with '#', a [section] header, or key = value.
struct ParsedConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

ParsedConfig parse_config_text(const std::string& text, const std::string& origin);
ParsedConfig parse_config_file(const std::string& path);

/// Builds a scenario from a config file. Every key is optional with the
/// documented default, but unknown sections or keys are errors: the file is
/// the single source of truth and a typo must not silently fall back.
ScenarioConfig scenario_from_file(const std::string& path);
ScenarioConfig scenario_from_text(const std::string& text, const std::string& origin);

}  // namespace cadmm

#endif  // CADMM_CONFIG_IO_HPP

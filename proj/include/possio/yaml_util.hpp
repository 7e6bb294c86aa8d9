#pragma once

// Strict accessors over yaml-cpp nodes. Every failure is a ConfigError whose
// message starts with "line L, column C: ".

#include <yaml-cpp/yaml.h>

#include <initializer_list>
#include <string>
#include <vector>

namespace possio::yaml {

std::string where(const YAML::Node& node);

void require_map(const YAML::Node& node, const std::string& section);
void reject_unknown_keys(const YAML::Node& node, const std::string& section,
                         std::initializer_list<const char*> allowed);

double as_double(const YAML::Node& node, const std::string& key);
long as_int(const YAML::Node& node, const std::string& key);

double required_double(const YAML::Node& map, const char* key, const std::string& section);
double optional_double(const YAML::Node& map, const char* key, const std::string& section,
                       double fallback);
long optional_int(const YAML::Node& map, const char* key, const std::string& section,
                  long fallback);
std::string optional_string(const YAML::Node& map, const char* key, const std::string& section,
                            const std::string& fallback);
std::vector<double> optional_doubles(const YAML::Node& map, const char* key,
                                     const std::string& section, std::vector<double> fallback);

}  // namespace possio::yaml

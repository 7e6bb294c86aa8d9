#include "possio/yaml_util.hpp"

#include "possio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace possio::yaml {

std::string where(const YAML::Node& node) {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) return "";
    return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

void require_map(const YAML::Node& node, const std::string& section) {
    if (!node.IsMap()) throw ConfigError(where(node) + "section '" + section + "' must be a mapping");
}

void reject_unknown_keys(const YAML::Node& node, const std::string& section,
                         std::initializer_list<const char*> allowed) {
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) {
            throw ConfigError(where(kv.first) + "unknown key '" + key + "' in section '" + section + "'");
        }
    }
}

double as_double(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ConfigError(where(node) + "'" + key + "' must be a number");
    double v = 0.0;
    if (!YAML::convert<double>::decode(node, v) || !std::isfinite(v)) {
        throw ConfigError(where(node) + "'" + key + "' is not a finite number: '" + node.Scalar() + "'");
    }
    return v;
}

long as_int(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ConfigError(where(node) + "'" + key + "' must be an integer");
    long v = 0;
    if (!YAML::convert<long>::decode(node, v)) {
        throw ConfigError(where(node) + "'" + key + "' is not an integer: '" + node.Scalar() + "'");
    }
    return v;
}

double required_double(const YAML::Node& map, const char* key, const std::string& section) {
    const YAML::Node n = map[key];
    if (!n) throw ConfigError(where(map) + "missing required key '" + section + "." + key + "'");
    return as_double(n, section + "." + key);
}

double optional_double(const YAML::Node& map, const char* key, const std::string& section,
                       double fallback) {
    const YAML::Node n = map[key];
    return n ? as_double(n, section + "." + key) : fallback;
}

long optional_int(const YAML::Node& map, const char* key, const std::string& section, long fallback) {
    const YAML::Node n = map[key];
    return n ? as_int(n, section + "." + key) : fallback;
}

std::string optional_string(const YAML::Node& map, const char* key, const std::string& section,
                            const std::string& fallback) {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    if (!n.IsScalar()) throw ConfigError(where(n) + "'" + section + "." + key + "' must be a string");
    return n.Scalar();
}

std::vector<double> optional_doubles(const YAML::Node& map, const char* key,
                                     const std::string& section, std::vector<double> fallback) {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    const std::string name = section + "." + key;
    if (n.IsScalar()) return {as_double(n, name)};
    if (!n.IsSequence()) throw ConfigError(where(n) + "'" + name + "' must be a number or a list");
    std::vector<double> out;
    for (const auto& item : n) out.push_back(as_double(item, name));
    return out;
}

}  // namespace possio::yaml

#pragma once

#include <string>

#include <json.hpp>

namespace oshe {

// Minimal TOML reader covering the config surface: [section] and
// [section.sub] headers, key = value pairs with strings, numbers, booleans,
// and flat arrays, plus # comments. Parsed into the same JSON document the
// JSON config path produces. Throws ConfigError with a line number on
// anything outside that subset.
nlohmann::json parse_toml_lite(const std::string& text);

} // namespace oshe

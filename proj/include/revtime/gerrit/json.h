#pragma once

#include <string_view>

#include "json.hpp"

namespace revtime::gerrit {

// Gerrit prefixes every JSON response with this line to defeat XSSI.
inline constexpr std::string_view kXssiGuard = ")]}'";

// Strips the optional guard (and the newline after it) and parses the rest.
// Throws Error(kMalformedJson) on parse failure.
nlohmann::json parse_gerrit_json(std::string_view body);

}  // namespace revtime::gerrit

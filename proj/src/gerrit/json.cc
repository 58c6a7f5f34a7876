#include "revtime/gerrit/json.h"

#include "revtime/core/error.h"

namespace revtime::gerrit {

nlohmann::json parse_gerrit_json(std::string_view body) {
  if (body.substr(0, kXssiGuard.size()) == kXssiGuard) {
    body.remove_prefix(kXssiGuard.size());
    if (!body.empty() && body.front() == '\r') body.remove_prefix(1);
    if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
  }
  try {
    return nlohmann::json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedJson, e.what());
  }
}

}  // namespace revtime::gerrit

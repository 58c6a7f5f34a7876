#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace revtime {

// UTC instant with microsecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

// Accepts "YYYY-MM-DD HH:MM:SS[.fffffffff]" (Gerrit) and
// "YYYY-MM-DDTHH:MM:SS[.ffffff]Z" (ISO). Sub-microsecond digits are truncated.
// Throws Error(kSchemaError) on anything else.
Timestamp parse_timestamp(std::string_view text);

// ISO-8601 UTC with exactly six fractional digits, e.g. 2021-04-27T10:00:00.000000Z.
std::string format_timestamp(Timestamp ts);

// Gerrit wire format with nine fractional digits.
std::string format_gerrit_timestamp(Timestamp ts);

inline double hours_between(Timestamp from, Timestamp to) {
  return std::chrono::duration<double, std::ratio<3600>>(to - from).count();
}

// Day of week with Monday = 0 ... Sunday = 6, evaluated at ts shifted by
// offset_minutes (i.e. in the local time of that offset).
int local_weekday(Timestamp ts, int offset_minutes);

inline Timestamp from_unix_seconds(std::int64_t seconds) {
  return Timestamp(std::chrono::seconds(seconds));
}

}  // namespace revtime

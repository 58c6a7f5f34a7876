#include "revtime/core/time.h"

#include <cstdio>

#include "revtime/core/error.h"

namespace revtime {
namespace {

using namespace std::chrono;

bool read_digits(std::string_view text, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  pos += count;
  out = value;
  return true;
}

bool expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) return false;
  ++pos;
  return true;
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorCode::kSchemaError, "invalid timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_digits(text, pos, 4, y) || !expect(text, pos, '-') ||
      !read_digits(text, pos, 2, mo) || !expect(text, pos, '-') ||
      !read_digits(text, pos, 2, d)) {
    bad(text);
  }
  if (pos >= text.size() || (text[pos] != ' ' && text[pos] != 'T')) bad(text);
  ++pos;
  if (!read_digits(text, pos, 2, h) || !expect(text, pos, ':') ||
      !read_digits(text, pos, 2, mi) || !expect(text, pos, ':') ||
      !read_digits(text, pos, 2, s)) {
    bad(text);
  }
  std::int64_t micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) micros = micros * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) bad(text);
    for (int i = digits; i < 6; ++i) micros *= 10;
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) bad(text);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad(text);
  return Timestamp(sys_days(ymd).time_since_epoch() + hours(h) + minutes(mi) + seconds(s) +
                   microseconds(micros));
}

namespace {

struct Fields {
  int y;
  unsigned mo, d;
  long h, mi, s, us;
};

Fields split(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  auto rest = ts - day_point;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto mi = duration_cast<minutes>(rest);
  rest -= mi;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), static_cast<long>(h.count()),
          static_cast<long>(mi.count()), static_cast<long>(s.count()),
          static_cast<long>(rest.count())};
}

}  // namespace

std::string format_timestamp(Timestamp ts) {
  const Fields f = split(ts);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%06ldZ", f.y, f.mo, f.d, f.h,
                f.mi, f.s, f.us);
  return buf;
}

std::string format_gerrit_timestamp(Timestamp ts) {
  const Fields f = split(ts);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld.%06ld000", f.y, f.mo, f.d, f.h,
                f.mi, f.s, f.us);
  return buf;
}

int local_weekday(Timestamp ts, int offset_minutes) {
  const auto local = ts + minutes(offset_minutes);
  const weekday wd{floor<days>(local)};
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(wd.iso_encoding()) - 1;
}

}  // namespace revtime

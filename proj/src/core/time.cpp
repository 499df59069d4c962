#include "recipemem/core/time.hpp"

#include <cstdio>

#include "recipemem/core/error.hpp"

namespace recipemem {

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Clock system_clock() { return &now_utc; }

Clock fixed_clock(Timestamp at) {
  return [at] { return at; };
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const long long ms = (ts - day).count();
  const long long secs = ms / 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600,
                (secs / 60) % 60, secs % 60, static_cast<long long>(ms % 1000));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0, frac = 0;
  int consumed = 0;
  const std::string copy(text);
  const int n = std::sscanf(copy.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u.%3uZ%n", &y, &mo, &d, &h, &mi, &s, &frac,
                            &consumed);
  if (n != 7 || consumed != static_cast<int>(copy.size()) || copy.size() != 24) {
    throw FormatError("timestamp must look like 2024-01-31T12:00:00.000Z, got '" + copy + "'");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw FormatError("timestamp out of range: " + copy);
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{frac};
}

}  // namespace recipemem

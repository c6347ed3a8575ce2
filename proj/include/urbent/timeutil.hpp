#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace urbent {

/// Seconds since 1970-01-01T00:00:00Z.
using EpochSeconds = std::int64_t;

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

}  // namespace detail

/// Parses the strict form `YYYY-MM-DDTHH:MM:SSZ`. Anything else, including
/// out-of-range calendar fields, yields nullopt.
inline std::optional<EpochSeconds> parse_iso8601_utc(std::string_view s) {
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != 'Z') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!detail::parse_fixed_int(s, 0, 4, y) || !detail::parse_fixed_int(s, 5, 2, mo) ||
      !detail::parse_fixed_int(s, 8, 2, d) || !detail::parse_fixed_int(s, 11, 2, h) ||
      !detail::parse_fixed_int(s, 14, 2, mi) || !detail::parse_fixed_int(s, 17, 2, sec)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<EpochSeconds>(days_since_epoch) * 86400 + h * 3600 + mi * 60 + sec;
}

inline std::string format_iso8601_utc(EpochSeconds t) {
  using namespace std::chrono;
  const auto tp = sys_seconds{seconds{t}};
  const auto day_start = floor<days>(tp);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{tp - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

/// Calendar fields of an instant seen at a fixed UTC offset.
struct LocalTime {
  int year = 1970;
  int weekday = 0;  ///< 0 = Monday .. 6 = Sunday
  int hour = 0;
};

inline LocalTime to_local(EpochSeconds t, int tz_offset_minutes) {
  using namespace std::chrono;
  const auto tp = sys_seconds{seconds{t + static_cast<EpochSeconds>(tz_offset_minutes) * 60}};
  const auto day_start = floor<days>(tp);
  const year_month_day ymd{day_start};
  const weekday wd{day_start};
  const auto hours_in = duration_cast<hours>(tp - day_start).count();
  return {static_cast<int>(ymd.year()), static_cast<int>(wd.iso_encoding()) - 1,
          static_cast<int>(hours_in)};
}

/// 1990-01-01T00:00:00Z, the earliest accepted photo timestamp.
inline constexpr EpochSeconds kMinPhotoTimestamp = 631152000;

inline EpochSeconds now_epoch_seconds() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace urbent

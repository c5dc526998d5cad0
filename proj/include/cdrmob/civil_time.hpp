#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace cdrmob {

// Seconds since 1970-01-01T00:00:00, proleptic Gregorian, no time zone.
// CDR timestamps are civil wall-clock values; we never convert zones.
using EpochSeconds = std::int64_t;

struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31
  friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

// Howard Hinnant's days-from-civil algorithm; exact over the full range.
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

constexpr std::int64_t day_number(const CivilDate& d) {
  return days_from_civil(d.year, d.month, d.day);
}

constexpr EpochSeconds seconds_at(const CivilDate& d, int hh = 0, int mm = 0,
                                  int ss = 0) {
  return day_number(d) * 86400 + hh * 3600 + mm * 60 + ss;
}

inline CivilDate date_of(EpochSeconds t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  return civil_from_days(days);
}

// Civil hour of day, 0..23.
inline int hour_of(EpochSeconds t) {
  std::int64_t s = t % 86400;
  if (s < 0) s += 86400;
  return static_cast<int>(s / 3600);
}

namespace detail {

inline bool parse_fixed_uint(std::string_view s, std::size_t pos,
                             std::size_t len, unsigned& out) {
  unsigned v = 0;
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

inline constexpr int days_in_month(int year, unsigned month) {
  constexpr int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap =
      (year % 4 == 0 && year % 100 != 0) || (year % 400 == 0);
  if (month == 2 && leap) return 29;
  return table[month - 1];
}

}  // namespace detail

// "YYYY-MM-DD"
inline std::optional<CivilDate> parse_iso_date(std::string_view s) {
  unsigned y, m, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::parse_fixed_uint(s, 0, 4, y) ||
      !detail::parse_fixed_uint(s, 5, 2, m) ||
      !detail::parse_fixed_uint(s, 8, 2, d))
    return std::nullopt;
  if (m < 1 || m > 12 || d < 1 ||
      d > static_cast<unsigned>(detail::days_in_month(static_cast<int>(y), m)))
    return std::nullopt;
  return CivilDate{static_cast<int>(y), m, d};
}

// "YYYY-MM-DDTHH:MM[:SS]"; a space is accepted in place of 'T'.
// Seconds are optional: the source schema records minutes or finer.
inline std::optional<EpochSeconds> parse_iso_datetime(std::string_view s) {
  if (s.size() != 16 && s.size() != 19) return std::nullopt;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  const auto date = parse_iso_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  unsigned hh, mm, ss = 0;
  if (s[13] != ':') return std::nullopt;
  if (!detail::parse_fixed_uint(s, 11, 2, hh) ||
      !detail::parse_fixed_uint(s, 14, 2, mm))
    return std::nullopt;
  if (s.size() == 19) {
    if (s[16] != ':' || !detail::parse_fixed_uint(s, 17, 2, ss))
      return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return seconds_at(*date, static_cast<int>(hh), static_cast<int>(mm),
                    static_cast<int>(ss));
}

inline std::string format_iso_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

inline std::string format_iso_datetime(EpochSeconds t) {
  const CivilDate d = date_of(t);
  std::int64_t s = t - day_number(d) * 86400;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", d.year,
                d.month, d.day, static_cast<int>(s / 3600),
                static_cast<int>((s / 60) % 60), static_cast<int>(s % 60));
  return buf;
}

}  // namespace cdrmob

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/kvconfig.hpp"

namespace cdrmob {

enum class DayKind : std::uint8_t { work, off };

struct DayClass {
  DayKind kind = DayKind::work;
  bool within_event = true;
};

// Calendar configuration: observation window, off-day list, which days fall
// outside the event proper, and excluded hour ranges (gaps in the source
// feed; records inside them are dropped and counted).
struct DayClassConfig {
  EpochSeconds window_start = std::numeric_limits<EpochSeconds>::min();
  EpochSeconds window_end = std::numeric_limits<EpochSeconds>::max();  // half-open
  std::vector<std::int64_t> off_days;           // day numbers
  std::vector<std::int64_t> out_of_event_days;  // day numbers
  std::vector<std::pair<EpochSeconds, EpochSeconds>> excluded_ranges;

  bool in_window(EpochSeconds t) const {
    return t >= window_start && t < window_end;
  }

  bool excluded(EpochSeconds t) const {
    for (const auto& [a, b] : excluded_ranges)
      if (t >= a && t < b) return true;
    return false;
  }

  bool bounded() const {
    return window_start != std::numeric_limits<EpochSeconds>::min() &&
           window_end != std::numeric_limits<EpochSeconds>::max();
  }

  // Day numbers covered by the window, in order.
  std::vector<std::int64_t> window_days() const {
    std::vector<std::int64_t> days;
    if (!bounded()) return days;
    const std::int64_t first = day_number(date_of(window_start));
    const std::int64_t last = day_number(date_of(window_end - 1));
    for (std::int64_t d = first; d <= last; ++d) days.push_back(d);
    return days;
  }

  // The July 2008 study calendar: a 12-day window with five off days
  // (weekends plus the national holiday) and the first/last days outside
  // the event itself.
  static DayClassConfig armada2008() {
    DayClassConfig cfg;
    cfg.window_start = seconds_at(CivilDate{2008, 7, 4});
    cfg.window_end = seconds_at(CivilDate{2008, 7, 16});
    for (unsigned d : {5u, 6u, 12u, 13u, 14u})
      cfg.off_days.push_back(day_number(CivilDate{2008, 7, d}));
    cfg.out_of_event_days.push_back(day_number(CivilDate{2008, 7, 4}));
    cfg.out_of_event_days.push_back(day_number(CivilDate{2008, 7, 15}));
    return cfg;
  }

  static DayClassConfig unbounded() { return DayClassConfig{}; }

  // Keys: window_start, window_end (ISO date or date-time), off_days and
  // out_of_event_days (comma-separated ISO dates), excluded_hours
  // (comma-separated "start..end" ISO date-time ranges).
  static DayClassConfig from_kv(const KeyValueFile& kv) {
    DayClassConfig cfg;
    if (kv.has("window_start")) cfg.window_start = kv.get_datetime("window_start");
    if (kv.has("window_end")) cfg.window_end = kv.get_datetime("window_end");
    for (const std::string& item : kv.get_list_or("off_days"))
      cfg.off_days.push_back(parse_day(kv, item));
    for (const std::string& item : kv.get_list_or("out_of_event_days"))
      cfg.out_of_event_days.push_back(parse_day(kv, item));
    for (const std::string& item : kv.get_list_or("excluded_hours")) {
      const std::size_t sep = item.find("..");
      if (sep == std::string::npos)
        throw ConfigError(kv.source() + ": excluded_hours item '" + item +
                          "' is not 'start..end'");
      const auto a = parse_iso_datetime(KeyValueFile::trim(item.substr(0, sep)));
      const auto b = parse_iso_datetime(KeyValueFile::trim(item.substr(sep + 2)));
      if (!a || !b || *a >= *b)
        throw ConfigError(kv.source() + ": bad excluded_hours range '" + item + "'");
      cfg.excluded_ranges.emplace_back(*a, *b);
    }
    return cfg;
  }

  static DayClassConfig load(const std::string& path) {
    return from_kv(KeyValueFile::load(path));
  }

 private:
  static std::int64_t parse_day(const KeyValueFile& kv, const std::string& s) {
    const auto d = parse_iso_date(s);
    if (!d) throw ConfigError(kv.source() + ": bad date '" + s + "'");
    return day_number(*d);
  }
};

inline DayClass classify_day(const CivilDate& date, const DayClassConfig& cfg) {
  const std::int64_t day = day_number(date);
  const EpochSeconds t = day * 86400;
  if (!cfg.in_window(t))
    throw DateOutOfWindow("date " + format_iso_date(date) +
                          " outside the observation window");
  const auto contains = [](const std::vector<std::int64_t>& v, std::int64_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  DayClass out;
  out.kind = contains(cfg.off_days, day) ? DayKind::off : DayKind::work;
  out.within_event = !contains(cfg.out_of_event_days, day);
  return out;
}

}  // namespace cdrmob

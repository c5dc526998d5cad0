#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/csv.hpp"
#include "cdrmob/dayclass.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/parallel.hpp"
#include "cdrmob/towers.hpp"

namespace cdrmob {

enum class ActivityType : std::uint8_t {
  call_in,
  call_out,
  sms_in,
  sms_out,
  handover,
  abnormal_halt,
  normal_end,
};

inline constexpr std::string_view kActivityCodes[] = {
    "CALL_IN", "CALL_OUT", "SMS_IN",     "SMS_OUT",
    "HANDOVER", "ABNORMAL_HALT", "NORMAL_END"};
inline constexpr std::size_t kActivityCount = 7;

inline std::string_view activity_code(ActivityType a) {
  return kActivityCodes[static_cast<std::size_t>(a)];
}

inline std::optional<ActivityType> parse_activity_code(std::string_view s) {
  for (std::size_t i = 0; i < kActivityCount; ++i)
    if (s == kActivityCodes[i]) return static_cast<ActivityType>(i);
  return std::nullopt;
}

// One validated subscriber activity event. Towers are stored as ordinals
// into the TowerMap that parsed the record.
struct CdrRecord {
  std::string subscriber_id;
  EpochSeconds timestamp = 0;
  std::uint32_t tower = 0;
  std::uint32_t cell = 0;
  ActivityType activity = ActivityType::call_in;
};

struct ParseOptions {
  bool strict = false;
  // Records outside the window or inside an excluded range are dropped and
  // counted; the default accepts everything.
  EpochSeconds window_start = std::numeric_limits<EpochSeconds>::min();
  EpochSeconds window_end = std::numeric_limits<EpochSeconds>::max();
  std::vector<std::pair<EpochSeconds, EpochSeconds>> excluded_ranges;
  unsigned threads = 0;

  void apply_calendar(const DayClassConfig& cfg) {
    window_start = cfg.window_start;
    window_end = cfg.window_end;
    excluded_ranges = cfg.excluded_ranges;
  }
};

struct ParseStats {
  std::uint64_t lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t malformed = 0;
  std::uint64_t unknown_activity = 0;
  std::uint64_t unknown_tower = 0;
  std::uint64_t out_of_window = 0;
  std::uint64_t excluded_hours = 0;

  std::uint64_t dropped() const {
    return malformed + unknown_activity + unknown_tower + out_of_window +
           excluded_hours;
  }
};

struct ParseResult {
  std::vector<CdrRecord> records;  // in input order
  ParseStats stats;
};

namespace detail {

enum class LineError { none, malformed, unknown_activity, unknown_tower };

// CDR CSV line: subscriber_id,iso_timestamp,tower_id,cell_id,activity_code
inline LineError parse_cdr_line(std::string_view line, const TowerMap& towers,
                                CdrRecord& out) {
  std::string_view f[6];
  if (split_fields(line, f, 5) != 5) return LineError::malformed;
  if (f[0].empty()) return LineError::malformed;
  const auto ts = parse_iso_datetime(f[1]);
  if (!ts) return LineError::malformed;
  const auto cell = parse_u64(f[3]);
  if (!cell) return LineError::malformed;
  const auto activity = parse_activity_code(f[4]);
  if (!activity) return LineError::unknown_activity;
  const auto tower = towers.find(f[2]);
  if (!tower) return LineError::unknown_tower;
  out.subscriber_id.assign(f[0]);
  out.timestamp = *ts;
  out.tower = *tower;
  out.cell = static_cast<std::uint32_t>(*cell);
  out.activity = *activity;
  return LineError::none;
}

inline const char* line_error_name(LineError e) {
  switch (e) {
    case LineError::malformed: return "malformed line";
    case LineError::unknown_activity: return "unknown activity code";
    case LineError::unknown_tower: return "unknown tower";
    default: return "ok";
  }
}

}  // namespace detail

// Parses CDR CSV text. Chunk-parallel over line ranges; chunk outputs are
// concatenated in chunk order, so the result is identical to a sequential
// parse regardless of worker count. In lenient mode bad lines are counted
// and skipped; in strict mode the first bad line (lowest line number) aborts.
inline ParseResult parse_cdr_text(std::string_view text,
                                  const TowerMap& towers,
                                  const ParseOptions& options = {},
                                  std::string_view source = "<memory>") {
  // Split at line boundaries.
  const unsigned workers = resolve_threads(options.threads);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // byte ranges
  std::vector<std::uint64_t> first_line;                   // 1-based
  {
    const std::size_t target = std::max<std::size_t>(
        1, (text.size() + workers - 1) / workers);
    std::size_t pos = 0;
    std::uint64_t line = 1;
    while (pos < text.size()) {
      std::size_t end = std::min(text.size(), pos + target);
      while (end < text.size() && text[end - 1] != '\n') ++end;
      spans.emplace_back(pos, end);
      first_line.push_back(line);
      for (std::size_t i = pos; i < end; ++i)
        if (text[i] == '\n') ++line;
      pos = end;
    }
  }

  struct ChunkOut {
    std::vector<CdrRecord> records;
    ParseStats stats;
    std::uint64_t error_line = 0;  // strict mode: first bad line, 0 if none
    detail::LineError error_kind = detail::LineError::none;
  };
  std::vector<ChunkOut> chunks(spans.size());

  parallel_chunks(spans.size(), options.threads,
                  [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      ChunkOut& out = chunks[c];
      const std::string_view body =
          text.substr(spans[c].first, spans[c].second - spans[c].first);
      std::uint64_t line_no = first_line[c] - 1;
      std::size_t pos = 0;
      CdrRecord rec;
      while (pos < body.size()) {
        std::size_t nl = body.find('\n', pos);
        if (nl == std::string_view::npos) nl = body.size();
        std::string_view line = body.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        ++out.stats.lines;
        const auto err = detail::parse_cdr_line(line, towers, rec);
        if (err != detail::LineError::none) {
          if (options.strict && out.error_line == 0) {
            out.error_line = line_no;
            out.error_kind = err;
            return;  // later lines in this chunk are irrelevant
          }
          switch (err) {
            case detail::LineError::malformed: ++out.stats.malformed; break;
            case detail::LineError::unknown_activity:
              ++out.stats.unknown_activity;
              break;
            default: ++out.stats.unknown_tower; break;
          }
          continue;
        }
        if (rec.timestamp < options.window_start ||
            rec.timestamp >= options.window_end) {
          ++out.stats.out_of_window;
          continue;
        }
        bool cut = false;
        for (const auto& [a, b] : options.excluded_ranges)
          if (rec.timestamp >= a && rec.timestamp < b) {
            cut = true;
            break;
          }
        if (cut) {
          ++out.stats.excluded_hours;
          continue;
        }
        ++out.stats.parsed;
        out.records.push_back(std::move(rec));
        rec = CdrRecord{};
      }
    }
  });

  if (options.strict) {
    for (const ChunkOut& c : chunks) {
      if (c.error_line != 0) {
        const std::string where =
            std::string(source) + ":" + std::to_string(c.error_line);
        switch (c.error_kind) {
          case detail::LineError::unknown_activity:
            throw UnknownActivityCode(where + ": unknown activity code");
          case detail::LineError::unknown_tower:
            throw UnknownTower(where + ": unknown tower");
          default:
            throw MalformedLine(where + ": malformed line");
        }
      }
    }
  }

  ParseResult result;
  std::size_t total = 0;
  for (const ChunkOut& c : chunks) total += c.records.size();
  result.records.reserve(total);
  for (ChunkOut& c : chunks) {
    result.stats.lines += c.stats.lines;
    result.stats.parsed += c.stats.parsed;
    result.stats.malformed += c.stats.malformed;
    result.stats.unknown_activity += c.stats.unknown_activity;
    result.stats.unknown_tower += c.stats.unknown_tower;
    result.stats.out_of_window += c.stats.out_of_window;
    result.stats.excluded_hours += c.stats.excluded_hours;
    std::move(c.records.begin(), c.records.end(),
              std::back_inserter(result.records));
    c.records.clear();
  }
  return result;
}

inline ParseResult parse_cdr_file(const std::string& path,
                                  const TowerMap& towers,
                                  const ParseOptions& options = {}) {
  const std::string text = read_file(path);
  return parse_cdr_text(text, towers, options, path);
}

// -------------------------------------------------------------------------
// Subscriber index

struct IndexedEvent {
  EpochSeconds t = 0;
  std::uint32_t tower = 0;
  std::uint32_t cell = 0;
  ActivityType activity = ActivityType::call_in;
};

struct SubscriberSeries {
  std::string id;
  std::vector<IndexedEvent> events;  // time-sorted, ties in input order
};

struct IndexCounts {
  std::uint64_t input_records = 0;
  std::uint64_t kept_records = 0;
  std::uint64_t subscribers_kept = 0;
  std::uint64_t subscribers_dropped = 0;  // single-occurrence rule
};

struct SubscriberIndex {
  std::vector<SubscriberSeries> subscribers;  // sorted by id
  IndexCounts counts;

  std::optional<std::size_t> find(std::string_view id) const {
    const auto it = std::lower_bound(
        subscribers.begin(), subscribers.end(), id,
        [](const SubscriberSeries& s, std::string_view v) { return s.id < v; });
    if (it == subscribers.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - subscribers.begin());
  }
};

// Groups records by subscriber, sorts each series by time (stable, so equal
// timestamps keep input order), and drops subscribers with a single record:
// one occurrence carries no mobility information.
inline SubscriberIndex build_subscriber_index(std::vector<CdrRecord>&& records) {
  SubscriberIndex index;
  index.counts.input_records = records.size();

  std::unordered_map<std::string, std::uint32_t, detail::StringHash,
                     std::equal_to<>>
      slot_of;
  std::vector<SubscriberSeries> series;
  for (CdrRecord& r : records) {
    const auto [it, inserted] =
        slot_of.try_emplace(r.subscriber_id,
                            static_cast<std::uint32_t>(series.size()));
    if (inserted) {
      series.emplace_back();
      series.back().id = std::move(r.subscriber_id);
    }
    series[it->second].events.push_back(
        IndexedEvent{r.timestamp, r.tower, r.cell, r.activity});
  }
  records.clear();
  records.shrink_to_fit();

  std::vector<std::size_t> keep;
  keep.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].events.size() >= 2)
      keep.push_back(i);
    else
      ++index.counts.subscribers_dropped;
  }
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return series[a].id < series[b].id;
  });

  index.subscribers.reserve(keep.size());
  for (std::size_t i : keep) index.subscribers.push_back(std::move(series[i]));

  parallel_chunks(index.subscribers.size(), 0,
                  [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& ev = index.subscribers[i].events;
      std::stable_sort(ev.begin(), ev.end(),
                       [](const IndexedEvent& a, const IndexedEvent& b) {
                         return a.t < b.t;
                       });
    }
  });

  index.counts.subscribers_kept = index.subscribers.size();
  for (const SubscriberSeries& s : index.subscribers)
    index.counts.kept_records += s.events.size();
  return index;
}

// Keeps only events whose activity type is selected; series that fall under
// two events are dropped like at ingest. Whether handovers count as
// activities is analysis-dependent, so the mask is a caller choice.
using ActivityMask = std::array<bool, kActivityCount>;

inline ActivityMask all_activities() {
  ActivityMask m;
  m.fill(true);
  return m;
}

inline SubscriberIndex filter_by_activity(const SubscriberIndex& index,
                                          const ActivityMask& mask) {
  SubscriberIndex out;
  out.counts.input_records = index.counts.kept_records;
  for (const SubscriberSeries& s : index.subscribers) {
    SubscriberSeries kept;
    kept.id = s.id;
    for (const IndexedEvent& e : s.events)
      if (mask[static_cast<std::size_t>(e.activity)]) kept.events.push_back(e);
    if (kept.events.size() >= 2) {
      out.counts.kept_records += kept.events.size();
      out.subscribers.push_back(std::move(kept));
    } else {
      ++out.counts.subscribers_dropped;
    }
  }
  out.counts.subscribers_kept = out.subscribers.size();
  return out;
}

// The persisted index is the CDR CSV itself, partitioned by subscriber and
// time-sorted, so reading it back needs no second parser.
inline void save_index_csv(const SubscriberIndex& index, const TowerMap& towers,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  std::string buf;
  for (const SubscriberSeries& s : index.subscribers) {
    for (const IndexedEvent& e : s.events) {
      buf.clear();
      buf.append(s.id);
      buf.push_back(',');
      buf.append(format_iso_datetime(e.t));
      buf.push_back(',');
      buf.append(towers.tower(e.tower).id);
      buf.push_back(',');
      buf.append(std::to_string(e.cell));
      buf.push_back(',');
      buf.append(activity_code(e.activity));
      buf.push_back('\n');
      out << buf;
    }
  }
}

inline SubscriberIndex load_index_csv(const std::string& path,
                                      const TowerMap& towers,
                                      const ParseOptions& options = {}) {
  ParseResult parsed = parse_cdr_file(path, towers, options);
  return build_subscriber_index(std::move(parsed.records));
}

}  // namespace cdrmob

#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/dayclass.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/parallel.hpp"
#include "cdrmob/sectors.hpp"

namespace cdrmob {

// Activity counts per (sector, hour-of-day) and (sector, calendar day),
// with two ratio views: a bin's split across sectors, and a sector's split
// across time bins.
class DensityTable {
 public:
  DensityTable(std::vector<std::int64_t> days) : days_(std::move(days)) {
    for (auto& row : hour_counts_) row.fill(0);
    day_counts_.assign(days_.size(), {});
  }

  static constexpr int kHours = 24;

  void add(SectorId sector, EpochSeconds t) {
    const std::size_t s = static_cast<std::size_t>(sector);
    ++hour_counts_[static_cast<std::size_t>(hour_of(t))][s];
    const std::int64_t day = day_number(date_of(t));
    if (days_.empty()) return;
    if (day < days_.front() || day > days_.back()) {
      ++out_of_window_;
      return;
    }
    ++day_counts_[static_cast<std::size_t>(day - days_.front())][s];
  }

  void merge(const DensityTable& other) {
    for (int h = 0; h < kHours; ++h)
      for (std::size_t s = 0; s < kSectorCount; ++s)
        hour_counts_[h][s] += other.hour_counts_[h][s];
    for (std::size_t d = 0; d < day_counts_.size(); ++d)
      for (std::size_t s = 0; s < kSectorCount; ++s)
        day_counts_[d][s] += other.day_counts_[d][s];
    out_of_window_ += other.out_of_window_;
  }

  const std::vector<std::int64_t>& days() const { return days_; }
  std::uint64_t out_of_window() const { return out_of_window_; }

  std::uint64_t hour_count(std::size_t hour, SectorId s) const {
    return hour_counts_[hour][static_cast<std::size_t>(s)];
  }
  std::uint64_t day_count(std::size_t day_index, SectorId s) const {
    return day_counts_[day_index][static_cast<std::size_t>(s)];
  }

  std::uint64_t hour_bin_total(std::size_t hour) const {
    std::uint64_t t = 0;
    for (auto c : hour_counts_[hour]) t += c;
    return t;
  }
  std::uint64_t day_bin_total(std::size_t day_index) const {
    std::uint64_t t = 0;
    for (auto c : day_counts_[day_index]) t += c;
    return t;
  }
  std::uint64_t sector_hour_total(SectorId s) const {
    std::uint64_t t = 0;
    for (int h = 0; h < kHours; ++h) t += hour_count(h, s);
    return t;
  }
  std::uint64_t sector_day_total(SectorId s) const {
    std::uint64_t t = 0;
    for (std::size_t d = 0; d < day_counts_.size(); ++d) t += day_count(d, s);
    return t;
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (int h = 0; h < kHours; ++h) t += hour_bin_total(h);
    return t;
  }

  // CSV rows: bin_type,bin_value,sector,count,ratio,ratio_within_sector.
  // `ratio` is the sector's share of the time bin (shares of a nonzero bin
  // sum to 1); `ratio_within_sector` is the bin's share of the sector's
  // activity. Empty bins emit an empty ratio field rather than 0/0.
  void write_csv(std::ostream& os) const {
    os << "bin_type,bin_value,sector,count,ratio,ratio_within_sector\n";
    for (int h = 0; h < kHours; ++h) {
      const std::uint64_t bin_total = hour_bin_total(h);
      for (std::size_t s = 0; s < kSectorCount; ++s) {
        const auto id = static_cast<SectorId>(s);
        write_row(os, "hour", std::to_string(h), id, hour_count(h, id),
                  bin_total, sector_hour_total(id));
      }
    }
    for (std::size_t d = 0; d < days_.size(); ++d) {
      const std::uint64_t bin_total = day_bin_total(d);
      const std::string day = format_iso_date(civil_from_days(days_[d]));
      for (std::size_t s = 0; s < kSectorCount; ++s) {
        const auto id = static_cast<SectorId>(s);
        write_row(os, "day", day, id, day_count(d, id), bin_total,
                  sector_day_total(id));
      }
    }
  }

 private:
  static void write_row(std::ostream& os, std::string_view bin_type,
                        const std::string& bin_value, SectorId s,
                        std::uint64_t count, std::uint64_t bin_total,
                        std::uint64_t sector_total) {
    os << bin_type << ',' << bin_value << ',' << sector_name(s) << ','
       << count << ',';
    if (bin_total > 0)
      os << format_double(static_cast<double>(count) /
                          static_cast<double>(bin_total));
    os << ',';
    if (sector_total > 0)
      os << format_double(static_cast<double>(count) /
                          static_cast<double>(sector_total));
    os << '\n';
  }

  std::vector<std::int64_t> days_;
  std::array<std::array<std::uint64_t, kSectorCount>, kHours> hour_counts_{};
  std::vector<std::array<std::uint64_t, kSectorCount>> day_counts_;
  std::uint64_t out_of_window_ = 0;
};

// Accumulates every indexed record into its sector's hour and day bins.
// Partial tables per worker, merged in order.
inline DensityTable density_table(const SubscriberIndex& index,
                                  const SectorPartition& sectors,
                                  const DayClassConfig& calendar,
                                  unsigned threads = 0) {
  std::vector<DensityTable> partials;
  const std::vector<std::int64_t> days = calendar.window_days();
  const unsigned workers = resolve_threads(threads);
  partials.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) partials.emplace_back(days);

  parallel_chunks(index.subscribers.size(), threads,
                  [&](unsigned w, std::size_t begin, std::size_t end) {
    DensityTable& table = partials[w % partials.size()];
    for (std::size_t i = begin; i < end; ++i)
      for (const IndexedEvent& e : index.subscribers[i].events)
        table.add(sectors.sector(e.tower), e.t);
  });

  DensityTable result(days);
  for (const DensityTable& p : partials) result.merge(p);
  return result;
}

}  // namespace cdrmob

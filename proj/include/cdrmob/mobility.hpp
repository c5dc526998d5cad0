#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cdrmob/dayclass.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/parallel.hpp"
#include "cdrmob/towers.hpp"
#include "cdrmob/trajectory.hpp"

namespace cdrmob {

// Waiting time between two consecutive activities of one subscriber.
struct InterEventSample {
  std::uint32_t subscriber = 0;  // index into SubscriberIndex
  double dt_minutes = 0;
  std::uint32_t tower_from = 0;
  std::uint32_t tower_to = 0;
  EpochSeconds t0 = 0;  // first activity of the pair; owns the sample's day
};

struct DtWindow {
  double min_minutes = 15.0;
  double max_minutes = 1440.0;
  static DtWindow open() {
    return DtWindow{0.0, std::numeric_limits<double>::infinity()};
  }
};

struct InterEventResult {
  std::vector<InterEventSample> samples;
  std::uint64_t dropped_below = 0;
  std::uint64_t dropped_above = 0;
};

// One sample per consecutive activity pair per subscriber; pairs whose
// waiting time falls outside the window are counted and dropped. Waiting
// times are real minutes (timestamps may be finer than a minute).
inline InterEventResult inter_event_times(const SubscriberIndex& index,
                                          const DtWindow& window = {},
                                          unsigned threads = 0) {
  const unsigned workers = resolve_threads(threads);
  std::vector<InterEventResult> partial(workers);
  parallel_chunks(index.subscribers.size(), threads,
                  [&](unsigned w, std::size_t begin, std::size_t end) {
    InterEventResult& out = partial[w % workers];
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ev = index.subscribers[i].events;
      for (std::size_t k = 1; k < ev.size(); ++k) {
        const double dt =
            static_cast<double>(ev[k].t - ev[k - 1].t) / 60.0;
        if (dt < window.min_minutes) {
          ++out.dropped_below;
          continue;
        }
        if (dt > window.max_minutes) {
          ++out.dropped_above;
          continue;
        }
        out.samples.push_back(InterEventSample{
            static_cast<std::uint32_t>(i), dt, ev[k - 1].tower, ev[k].tower,
            ev[k - 1].t});
      }
    }
  });
  InterEventResult result;
  for (InterEventResult& p : partial) {
    result.dropped_below += p.dropped_below;
    result.dropped_above += p.dropped_above;
    result.samples.insert(result.samples.end(), p.samples.begin(),
                          p.samples.end());
  }
  return result;
}

// Travel step between two consecutive activities: Euclidean distance of the
// serving towers, paired with that step's waiting time.
struct DisplacementSample {
  std::uint32_t subscriber = 0;
  double dr_meters = 0;
  double dt_minutes = 0;
  EpochSeconds t0 = 0;
};

struct DisplacementResult {
  std::vector<DisplacementSample> samples;
  std::uint64_t dropped_above = 0;
  std::uint64_t pairs = 0;
};

inline constexpr double kDefaultDisplacementCutoff = 7.23e4;  // meters

inline DisplacementResult displacements(
    const SubscriberIndex& index, const TowerMap& towers,
    double cutoff_meters = kDefaultDisplacementCutoff, unsigned threads = 0) {
  const unsigned workers = resolve_threads(threads);
  std::vector<DisplacementResult> partial(workers);
  parallel_chunks(index.subscribers.size(), threads,
                  [&](unsigned w, std::size_t begin, std::size_t end) {
    DisplacementResult& out = partial[w % workers];
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ev = index.subscribers[i].events;
      for (std::size_t k = 1; k < ev.size(); ++k) {
        ++out.pairs;
        const Tower& a = towers.tower(ev[k - 1].tower);
        const Tower& b = towers.tower(ev[k].tower);
        const double dr = std::hypot(b.x - a.x, b.y - a.y);
        if (dr > cutoff_meters) {
          ++out.dropped_above;
          continue;
        }
        out.samples.push_back(DisplacementSample{
            static_cast<std::uint32_t>(i), dr,
            static_cast<double>(ev[k].t - ev[k - 1].t) / 60.0, ev[k - 1].t});
      }
    }
  });
  DisplacementResult result;
  for (DisplacementResult& p : partial) {
    result.dropped_above += p.dropped_above;
    result.pairs += p.pairs;
    result.samples.insert(result.samples.end(), p.samples.begin(),
                          p.samples.end());
  }
  return result;
}

// -------------------------------------------------------------------------
// Radius of gyration

struct GyrationRadius {
  double rg = 0;
  std::size_t n_positions = 0;
};

// Root-mean-square distance of the recorded positions from their mean.
// Two-pass: mean first, then deviations.
inline GyrationRadius radius_of_gyration(const Trajectory& traj) {
  if (traj.empty()) throw EmptyTrajectory("radius_of_gyration: no positions");
  const double n = static_cast<double>(traj.size());
  double mx = 0, my = 0;
  for (const TrajPoint& p : traj.points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double acc = 0;
  for (const TrajPoint& p : traj.points) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    acc += dx * dx + dy * dy;
  }
  return GyrationRadius{std::sqrt(acc / n), traj.size()};
}

// Radius of gyration of the trajectory prefix observed up to the end of
// each listed day. Incremental sums over coordinates shifted by the first
// position keep the subtraction benign; one pass over points + days.
// The series is not monotone: the center of mass moves as points accrue.
inline std::vector<std::pair<std::int64_t, double>> rg_time_series(
    const Trajectory& traj, std::span<const std::int64_t> days) {
  if (traj.empty()) throw EmptyTrajectory("rg_time_series: no positions");
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(days.size());
  const double x0 = traj.points.front().x;
  const double y0 = traj.points.front().y;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  std::size_t k = 0;
  for (std::int64_t day : days) {
    const EpochSeconds day_end = (day + 1) * 86400;
    for (; k < traj.points.size() && traj.points[k].t < day_end; ++k) {
      const double x = traj.points[k].x - x0;
      const double y = traj.points[k].y - y0;
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
    }
    if (k == 0) continue;  // no observations yet for this day
    const double n = static_cast<double>(k);
    const double var =
        (sxx + syy) / n - (sx / n) * (sx / n) - (sy / n) * (sy / n);
    out.emplace_back(day, std::sqrt(std::max(0.0, var)));
  }
  return out;
}

// -------------------------------------------------------------------------
// Sample partitioning

template <class Sample>
struct DaySplit {
  std::vector<Sample> work;
  std::vector<Sample> off;
};

// Splits timestamped samples by the day class of their owning day (a pair
// spanning midnight belongs to the day of its first activity, carried in t0).
template <class Sample>
DaySplit<Sample> split_by_dayclass(std::span<const Sample> samples,
                                   const DayClassConfig& calendar) {
  DaySplit<Sample> out;
  for (const Sample& s : samples) {
    const DayClass cls = classify_day(date_of(s.t0), calendar);
    (cls.kind == DayKind::work ? out.work : out.off).push_back(s);
  }
  return out;
}

// Groups subscribers by total activity count. Edges must be strictly
// increasing; group g holds subscribers with count <= edges[g], the last
// group holds the rest. Returns subscriber indexes per group.
inline std::vector<std::vector<std::uint32_t>> activity_sampling_groups(
    const SubscriberIndex& index, std::span<const std::uint64_t> edges) {
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1])
      throw InvalidConfig("activity group edges must be strictly increasing");
  std::vector<std::vector<std::uint32_t>> groups(edges.size() + 1);
  for (std::uint32_t i = 0; i < index.subscribers.size(); ++i) {
    const std::uint64_t count = index.subscribers[i].events.size();
    std::size_t g = 0;
    while (g < edges.size() && count > edges[g]) ++g;
    groups[g].push_back(i);
  }
  return groups;
}

}  // namespace cdrmob

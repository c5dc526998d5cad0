#pragma once

#include <string>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/towers.hpp"

namespace cdrmob {

struct TrajPoint {
  EpochSeconds t = 0;
  double x = 0;
  double y = 0;
};

// Time-ordered positions of one subscriber; positions are the serving
// tower's coordinates.
struct Trajectory {
  std::string subscriber_id;
  std::vector<TrajPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

inline Trajectory trajectory_of(const SubscriberSeries& series,
                                const TowerMap& towers) {
  Trajectory traj;
  traj.subscriber_id = series.id;
  traj.points.reserve(series.events.size());
  for (const IndexedEvent& e : series.events) {
    const Tower& t = towers.tower(e.tower);
    traj.points.push_back(TrajPoint{e.t, t.x, t.y});
  }
  return traj;
}

}  // namespace cdrmob

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdrmob/errors.hpp"
#include "cdrmob/mobility.hpp"
#include "cdrmob/parallel.hpp"
#include "cdrmob/prng.hpp"
#include "cdrmob/trajectory.hpp"

namespace cdrmob {

struct Point {
  double x = 0;
  double y = 0;
};

inline Point center_of_mass(const Trajectory& traj) {
  if (traj.empty()) throw EmptyTrajectory("center_of_mass: no positions");
  double sx = 0, sy = 0;
  for (const TrajPoint& p : traj.points) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(traj.size());
  return Point{sx / n, sy / n};
}

// The exact coordinate pair visited most often; ties resolve to the pair
// seen first. Comparison is bitwise, which is what tower-snapped positions
// produce.
inline Point most_frequent_position(const Trajectory& traj) {
  if (traj.empty())
    throw EmptyTrajectory("most_frequent_position: no positions");
  struct Slot {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  const auto key_of = [](const TrajPoint& p) {
    std::uint64_t kx, ky;
    std::memcpy(&kx, &p.x, sizeof kx);
    std::memcpy(&ky, &p.y, sizeof ky);
    // mix halves; collisions only force an extra count, never a wrong answer
    return kx * 0x9E3779B97F4A7C15ULL ^ ky;
  };
  // Two-level check: hash bucket then exact coordinate match.
  std::unordered_map<std::uint64_t, std::vector<std::pair<Point, Slot>>> table;
  table.reserve(traj.size());
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const TrajPoint& p = traj.points[i];
    auto& bucket = table[key_of(p)];
    bool found = false;
    for (auto& [pt, slot] : bucket) {
      if (pt.x == p.x && pt.y == p.y) {
        ++slot.count;
        found = true;
        break;
      }
    }
    if (!found) bucket.push_back({Point{p.x, p.y}, Slot{1, i}});
  }
  Point best{};
  Slot best_slot{0, 0};
  for (const auto& [key, bucket] : table) {
    for (const auto& [pt, slot] : bucket) {
      if (slot.count > best_slot.count ||
          (slot.count == best_slot.count && slot.first < best_slot.first)) {
        best = pt;
        best_slot = slot;
      }
    }
  }
  return best;
}

// Symmetric second-moment tensor of the positions:
//   I_xx = sum y_i^2, I_yy = sum x_i^2, I_xy = I_yx = -sum x_i y_i.
struct InertiaTensor {
  double ixx = 0;
  double iyy = 0;
  double ixy = 0;

  double trace() const { return ixx + iyy; }
  // Eigenvalue gap of the symmetric 2x2 matrix.
  double gap() const { return std::hypot(ixx - iyy, 2.0 * ixy); }
};

enum class InertiaOrigin : std::uint8_t { raw_origin, center_of_mass };

inline InertiaTensor inertia_tensor(
    const Trajectory& traj,
    InertiaOrigin about = InertiaOrigin::center_of_mass) {
  if (traj.size() < 2)
    throw InsufficientPositions("inertia_tensor: need >= 2 positions, got " +
                                std::to_string(traj.size()));
  Point ref{0, 0};
  if (about == InertiaOrigin::center_of_mass) ref = center_of_mass(traj);
  InertiaTensor t;
  for (const TrajPoint& p : traj.points) {
    const double x = p.x - ref.x;
    const double y = p.y - ref.y;
    t.ixx += y * y;
    t.iyy += x * x;
    t.ixy -= x * y;
  }
  return t;
}

// Direction of the trajectory's major spread axis, in (-pi/2, pi/2].
//
// With a = I_xx, c = I_yy, b = I_xy, the gap mu = sqrt((a-c)^2 + 4 b^2) and
// the closed form cos(theta) = -b / sqrt(D^2 + b^2), D = (a - c + mu) / 2,
// give the unit eigenvector (-b, D) of the tensor's smaller eigenvalue --
// the axis along which the positions spread most (a position spread purely
// along x has I_xx = 0). Implemented as atan2(D, -b), which resolves the
// branch so that rotating all positions by -theta zeroes I_xy and leaves
// the larger variance on x. Angles are reduced mod pi: theta and theta+pi
// name the same axis.
inline double principal_angle(const InertiaTensor& t) {
  const double gap = t.gap();
  if (!(gap > 1e-12 * std::max(t.trace(), 1e-300)))
    throw DegenerateTensor(
        "principal_angle: isotropic tensor has no preferred axis");
  const double d = 0.5 * (t.ixx - t.iyy) + 0.5 * gap;
  double theta = std::atan2(d, -t.ixy);
  constexpr double pi = std::numbers::pi;
  if (theta > pi / 2) theta -= pi;
  if (theta <= -pi / 2) theta += pi;
  return theta;
}

// Per-subscriber frame: translate to the center of mass, rotate the major
// axis onto x, flip 180 degrees if the most frequent position lands at
// x <= 0, then divide each axis by its standard deviation.
struct IntrinsicFrame {
  double cm_x = 0, cm_y = 0;
  double theta = 0;  // radians, (-pi/2, pi/2]
  bool flipped = false;
  double sigma_x = 0, sigma_y = 0;
  double mf_x = 0, mf_y = 0;  // most frequent position, input coordinates

  Point apply(Point p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = p.x - cm_x, v = p.y - cm_y;
    double xr = u * c + v * s;
    double yr = -u * s + v * c;
    if (flipped) {
      xr = -xr;
      yr = -yr;
    }
    return Point{xr / sigma_x, yr / sigma_y};
  }

  Point invert(Point p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    double xr = p.x * sigma_x;
    double yr = p.y * sigma_y;
    if (flipped) {
      xr = -xr;
      yr = -yr;
    }
    return Point{xr * c - yr * s + cm_x, xr * s + yr * c + cm_y};
  }
};

struct IntrinsicResult {
  IntrinsicFrame frame;
  Trajectory transformed;
};

inline IntrinsicResult to_intrinsic(const Trajectory& traj) {
  if (traj.size() < 3)
    throw InsufficientPositions("to_intrinsic: need >= 3 positions, got " +
                                std::to_string(traj.size()));

  IntrinsicFrame frame;
  const Point cm = center_of_mass(traj);
  frame.cm_x = cm.x;
  frame.cm_y = cm.y;
  frame.theta = principal_angle(inertia_tensor(traj));

  const Point mf = most_frequent_position(traj);
  frame.mf_x = mf.x;
  frame.mf_y = mf.y;

  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  const auto rotate = [&](double x, double y) {
    return Point{(x - cm.x) * c + (y - cm.y) * s,
                 -(x - cm.x) * s + (y - cm.y) * c};
  };

  frame.flipped = rotate(mf.x, mf.y).x <= 0.0;

  // Standard deviations on the intrinsic axes (the rotated mean is zero;
  // the flip does not change them).
  double sxx = 0, syy = 0;
  for (const TrajPoint& p : traj.points) {
    const Point r = rotate(p.x, p.y);
    sxx += r.x * r.x;
    syy += r.y * r.y;
  }
  const double n = static_cast<double>(traj.size());
  frame.sigma_x = std::sqrt(sxx / n);
  frame.sigma_y = std::sqrt(syy / n);
  if (!(frame.sigma_y > 1e-12 * frame.sigma_x) || !(frame.sigma_x > 0))
    throw ZeroVariance(
        "to_intrinsic: trajectory is collinear; one intrinsic axis has no "
        "spread");

  IntrinsicResult out;
  out.frame = frame;
  out.transformed.subscriber_id = traj.subscriber_id;
  out.transformed.points.reserve(traj.size());
  for (const TrajPoint& p : traj.points) {
    const Point q = frame.apply(Point{p.x, p.y});
    out.transformed.points.push_back(TrajPoint{p.t, q.x, q.y});
  }
  return out;
}

// -------------------------------------------------------------------------
// Group selection by radius of gyration

struct RgRange {
  double lo = 0;
  double hi = 0;  // half-open [lo, hi)
};

// Draws k subscribers whose radius of gyration falls in each range.
// Candidates are ordered by subscriber index and sampled with a seeded
// partial Fisher-Yates shuffle, so a seed fully determines the selection.
inline std::vector<std::vector<std::uint32_t>> select_by_rg(
    const SubscriberIndex& index, const TowerMap& towers,
    std::span<const RgRange> ranges, std::size_t k, std::uint64_t seed) {
  for (std::size_t i = 0; i < ranges.size(); ++i)
    for (std::size_t j = i + 1; j < ranges.size(); ++j)
      if (ranges[i].lo < ranges[j].hi && ranges[j].lo < ranges[i].hi)
        throw InvalidConfig("select_by_rg: ranges overlap");

  std::vector<double> rg(index.subscribers.size());
  parallel_chunks(index.subscribers.size(), 0,
                  [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      rg[i] =
          radius_of_gyration(trajectory_of(index.subscribers[i], towers)).rg;
  });

  std::vector<std::vector<std::uint32_t>> out(ranges.size());
  for (std::size_t g = 0; g < ranges.size(); ++g) {
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < rg.size(); ++i)
      if (rg[i] >= ranges[g].lo && rg[i] < ranges[g].hi)
        candidates.push_back(i);
    if (candidates.size() < k)
      throw GroupEmpty("select_by_rg: range [" + std::to_string(ranges[g].lo) +
                       ", " + std::to_string(ranges[g].hi) + ") has " +
                       std::to_string(candidates.size()) +
                       " candidates, need " + std::to_string(k));
    SplitMix64 rng = substream(seed, g);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
    }
    out[g].assign(candidates.begin(), candidates.begin() + k);
  }
  return out;
}

}  // namespace cdrmob

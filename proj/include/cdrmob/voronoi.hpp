#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cdrmob/errors.hpp"
#include "cdrmob/towers.hpp"

namespace cdrmob {

// Voronoi membership realized as exact nearest-neighbor queries over a
// uniform bucket grid. No polygons are built: the analyses only ever need
// point -> cell assignment. Equidistant towers resolve to the lexically
// smallest tower id.
class VoronoiPartition {
 public:
  explicit VoronoiPartition(const TowerMap& towers) : towers_(&towers) {
    const std::size_t n = towers.size();
    if (n == 0) throw EmptyPartition("no towers to partition");
    const BoundingBox& bb = towers.bbox();
    min_x_ = bb.min_x;
    min_y_ = bb.min_y;
    const double span_x = std::max(bb.max_x - bb.min_x, 1.0);
    const double span_y = std::max(bb.max_y - bb.min_y, 1.0);
    // Aim for ~1 tower per cell on average.
    const double target = std::sqrt(static_cast<double>(n) /
                                    std::max(span_x * span_y, 1.0));
    nx_ = std::max<std::int32_t>(1, static_cast<std::int32_t>(span_x * target));
    ny_ = std::max<std::int32_t>(1, static_cast<std::int32_t>(span_y * target));
    nx_ = std::min(nx_, 4096);
    ny_ = std::min(ny_, 4096);
    cell_w_ = span_x / nx_;
    cell_h_ = span_y / ny_;

    // CSR buckets via counting sort.
    offsets_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<std::int32_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Tower& t = towers.tower(static_cast<std::uint32_t>(i));
      cell_of[i] = cell_index(col_of(t.x), row_of(t.y));
      ++offsets_[static_cast<std::size_t>(cell_of[i]) + 1];
    }
    for (std::size_t c = 1; c < offsets_.size(); ++c)
      offsets_[c] += offsets_[c - 1];
    ids_.resize(n);
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      ids_[cursor[static_cast<std::size_t>(cell_of[i])]++] =
          static_cast<std::uint32_t>(i);
  }

  const TowerMap& towers() const { return *towers_; }

  // Ordinal of the tower nearest to (px, py).
  std::uint32_t nearest(double px, double py) const {
    const std::int32_t cx = col_of(px);
    const std::int32_t cy = row_of(py);

    std::uint32_t best = 0;
    double best_d2 = -1.0;  // none yet
    bool found = false;

    // Phase 1: expand Chebyshev rings around the query cell until a
    // candidate appears.
    const std::int32_t max_r = std::max(nx_, ny_);
    std::int32_t r = 0;
    for (; r <= max_r && !found; ++r) {
      scan_ring(px, py, cx, cy, r, found, best, best_d2);
    }

    // Phase 2: any closer tower must lie in the square of half-width
    // sqrt(best_d2) around the query; scan its remaining cells, skipping
    // cells whose box distance already exceeds the best (strictly, so
    // equidistant candidates keep the tie-break honest).
    const double radius = std::sqrt(best_d2);
    const std::int32_t x0 = col_of(px - radius);
    const std::int32_t x1 = col_of(px + radius);
    const std::int32_t y0 = row_of(py - radius);
    const std::int32_t y1 = row_of(py + radius);
    for (std::int32_t gy = y0; gy <= y1; ++gy) {
      for (std::int32_t gx = x0; gx <= x1; ++gx) {
        if (std::max(std::abs(gx - cx), std::abs(gy - cy)) < r)
          continue;  // already scanned in phase 1
        if (box_dist2(px, py, gx, gy) > best_d2) continue;
        scan_cell(px, py, gx, gy, found, best, best_d2);
      }
    }
    return best;
  }

  const Tower& nearest_tower(double px, double py) const {
    return towers_->tower(nearest(px, py));
  }

 private:
  // Column/row of a coordinate, clamped to the grid (queries may fall
  // outside the tower bounding box).
  std::int32_t col_of(double x) const {
    const double c = std::floor((x - min_x_) / cell_w_);
    if (!(c > 0)) return 0;
    if (c >= nx_ - 1) return nx_ - 1;
    return static_cast<std::int32_t>(c);
  }
  std::int32_t row_of(double y) const {
    const double c = std::floor((y - min_y_) / cell_h_);
    if (!(c > 0)) return 0;
    if (c >= ny_ - 1) return ny_ - 1;
    return static_cast<std::int32_t>(c);
  }
  std::int32_t cell_index(std::int32_t cx, std::int32_t cy) const {
    return cy * nx_ + cx;
  }

  // Squared distance from the query point to the closest point of cell box.
  double box_dist2(double px, double py, std::int32_t gx, std::int32_t gy) const {
    const double x_lo = min_x_ + gx * cell_w_;
    const double x_hi = x_lo + cell_w_;
    const double y_lo = min_y_ + gy * cell_h_;
    const double y_hi = y_lo + cell_h_;
    const double dx = px < x_lo ? x_lo - px : (px > x_hi ? px - x_hi : 0.0);
    const double dy = py < y_lo ? y_lo - py : (py > y_hi ? py - y_hi : 0.0);
    return dx * dx + dy * dy;
  }

  void scan_cell(double px, double py, std::int32_t gx, std::int32_t gy,
                 bool& found, std::uint32_t& best, double& best_d2) const {
    const std::size_t c = static_cast<std::size_t>(cell_index(gx, gy));
    const std::uint32_t lo = offsets_[c];
    const std::uint32_t hi = offsets_[c + 1];
    for (std::uint32_t k = lo; k < hi; ++k) {
      const std::uint32_t id = ids_[k];
      const Tower& t = towers_->tower(id);
      const double dx = t.x - px;
      const double dy = t.y - py;
      const double d2 = dx * dx + dy * dy;
      if (!found || d2 < best_d2 ||
          (d2 == best_d2 &&
           towers_->id_rank(id) < towers_->id_rank(best))) {
        best = id;
        best_d2 = d2;
        found = true;
      }
    }
  }

  void scan_ring(double px, double py, std::int32_t cx, std::int32_t cy,
                 std::int32_t r, bool& found, std::uint32_t& best,
                 double& best_d2) const {
    const std::int32_t x0 = cx - r, x1 = cx + r;
    const std::int32_t y0 = cy - r, y1 = cy + r;
    for (std::int32_t gx = std::max(0, x0); gx <= std::min(nx_ - 1, x1); ++gx) {
      if (y0 >= 0) scan_cell(px, py, gx, y0, found, best, best_d2);
      if (r > 0 && y1 < ny_) scan_cell(px, py, gx, y1, found, best, best_d2);
    }
    if (r > 0) {
      for (std::int32_t gy = std::max(0, y0 + 1); gy <= std::min(ny_ - 1, y1 - 1);
           ++gy) {
        if (x0 >= 0) scan_cell(px, py, x0, gy, found, best, best_d2);
        if (x1 < nx_) scan_cell(px, py, x1, gy, found, best, best_d2);
      }
    }
  }

  const TowerMap* towers_;
  double min_x_ = 0, min_y_ = 0, cell_w_ = 1, cell_h_ = 1;
  std::int32_t nx_ = 1, ny_ = 1;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> ids_;
};

// Exhaustive scan with the same distance expression and tie-break; the
// reference for tests and small inputs.
inline std::uint32_t nearest_tower_linear(const TowerMap& towers, double px,
                                          double py) {
  if (towers.empty()) throw EmptyPartition("no towers to scan");
  std::uint32_t best = 0;
  double best_d2 = -1.0;
  bool found = false;
  for (std::uint32_t i = 0; i < towers.size(); ++i) {
    const Tower& t = towers.tower(i);
    const double dx = t.x - px;
    const double dy = t.y - py;
    const double d2 = dx * dx + dy * dy;
    if (!found || d2 < best_d2 ||
        (d2 == best_d2 && towers.id_rank(i) < towers.id_rank(best))) {
      best = i;
      best_d2 = d2;
      found = true;
    }
  }
  return best;
}

}  // namespace cdrmob

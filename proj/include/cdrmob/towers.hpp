#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdrmob/csv.hpp"
#include "cdrmob/errors.hpp"

namespace cdrmob {

// One antenna site: planar-projected coordinates in meters.
struct Tower {
  std::string id;
  double x = 0;
  double y = 0;
  std::uint32_t cell_count = 0;
};

// Maximum extent of the observed region; the default matches a 30 km x 30 km
// study area. Loading a tower file whose bounding box exceeds the limits
// fails, which catches unit mix-ups (km vs m) early.
struct RegionLimits {
  double max_span_x = 30'000.0;
  double max_span_y = 30'000.0;
  static RegionLimits unbounded() {
    const double inf = std::numeric_limits<double>::infinity();
    return RegionLimits{inf, inf};
  }
};

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
}  // namespace detail

// Immutable tower registry. Towers keep file order; lookups are by id and
// by dense ordinal (records store the ordinal).
class TowerMap {
 public:
  TowerMap() = default;

  static TowerMap from_towers(std::vector<Tower> towers,
                              const RegionLimits& limits = {}) {
    TowerMap map;
    map.towers_ = std::move(towers);
    map.index_and_validate(limits);
    return map;
  }

  // CSV columns: tower_id, x_meters, y_meters, cell_count.
  static TowerMap load_csv(const std::string& path,
                           const RegionLimits& limits = {}) {
    const std::string text = read_file(path);
    std::vector<Tower> towers;
    for_each_line(text, [&](std::uint64_t line_no, std::string_view line) {
      if (line.empty() || line.front() == '#') return;
      std::string_view f[5];
      if (split_fields(line, f, 4) != 4)
        throw MalformedLine(path + ":" + std::to_string(line_no) +
                            ": expected 4 tower fields");
      const auto x = parse_double(f[1]);
      const auto y = parse_double(f[2]);
      const auto cells = parse_u64(f[3]);
      if (f[0].empty() || !x || !y || !cells)
        throw MalformedLine(path + ":" + std::to_string(line_no) +
                            ": bad tower line");
      towers.push_back(Tower{std::string(f[0]), *x, *y,
                             static_cast<std::uint32_t>(*cells)});
    });
    TowerMap map;
    map.towers_ = std::move(towers);
    map.source_ = path;
    map.index_and_validate(limits);
    return map;
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    for (const Tower& t : towers_)
      out << t.id << ',' << format_double(t.x) << ',' << format_double(t.y)
          << ',' << t.cell_count << '\n';
  }

  std::size_t size() const { return towers_.size(); }
  bool empty() const { return towers_.empty(); }
  const Tower& tower(std::uint32_t ordinal) const { return towers_[ordinal]; }
  const std::vector<Tower>& towers() const { return towers_; }

  std::optional<std::uint32_t> find(std::string_view id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  // Rank of a tower's id in lexicographic order over all ids; the dataset's
  // deterministic tie-break for equidistant towers.
  std::uint32_t id_rank(std::uint32_t ordinal) const { return rank_[ordinal]; }

  const BoundingBox& bbox() const { return bbox_; }

 private:
  void index_and_validate(const RegionLimits& limits) {
    by_id_.reserve(towers_.size());
    for (std::uint32_t i = 0; i < towers_.size(); ++i) {
      const Tower& t = towers_[i];
      if (!std::isfinite(t.x) || !std::isfinite(t.y))
        throw TowerOutOfRegion(source_ + ": non-finite coordinates for tower " +
                               t.id);
      if (!by_id_.emplace(t.id, i).second)
        throw MalformedLine(source_ + ": duplicate tower id " + t.id);
    }
    if (!towers_.empty()) {
      bbox_.min_x = bbox_.max_x = towers_[0].x;
      bbox_.min_y = bbox_.max_y = towers_[0].y;
      for (const Tower& t : towers_) {
        bbox_.min_x = std::min(bbox_.min_x, t.x);
        bbox_.max_x = std::max(bbox_.max_x, t.x);
        bbox_.min_y = std::min(bbox_.min_y, t.y);
        bbox_.max_y = std::max(bbox_.max_y, t.y);
      }
      if (bbox_.max_x - bbox_.min_x > limits.max_span_x ||
          bbox_.max_y - bbox_.min_y > limits.max_span_y)
        throw TowerOutOfRegion(
            source_ + ": tower extent " +
            format_double(bbox_.max_x - bbox_.min_x) + " x " +
            format_double(bbox_.max_y - bbox_.min_y) +
            " m exceeds the configured region span");
    }
    rank_.resize(towers_.size());
    std::vector<std::uint32_t> order(towers_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return towers_[a].id < towers_[b].id;
    });
    for (std::uint32_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
  }

  std::vector<Tower> towers_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash,
                     std::equal_to<>>
      by_id_;
  std::vector<std::uint32_t> rank_;
  BoundingBox bbox_;
  std::string source_ = "<memory>";
};

}  // namespace cdrmob

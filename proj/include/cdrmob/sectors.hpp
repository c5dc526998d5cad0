#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrmob/csv.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/kvconfig.hpp"
#include "cdrmob/towers.hpp"

namespace cdrmob {

// The five study sub-areas: an event-centered core and its four compass
// surroundings.
enum class SectorId : std::uint8_t { center, north, south, east, west };
inline constexpr std::size_t kSectorCount = 5;
inline constexpr std::string_view kSectorNames[kSectorCount] = {
    "center", "north", "south", "east", "west"};

inline std::string_view sector_name(SectorId s) {
  return kSectorNames[static_cast<std::size_t>(s)];
}

inline std::optional<SectorId> parse_sector_name(std::string_view s) {
  for (std::size_t i = 0; i < kSectorCount; ++i)
    if (s == kSectorNames[i]) return static_cast<SectorId>(i);
  return std::nullopt;
}

// Disjoint cover of all towers by the five sectors.
struct SectorPartition {
  std::vector<std::uint8_t> sector_of_tower;  // indexed by tower ordinal
  std::array<std::vector<std::uint32_t>, kSectorCount> towers_in;

  SectorId sector(std::uint32_t tower) const {
    return static_cast<SectorId>(sector_of_tower[tower]);
  }
};

namespace detail {
inline SectorPartition finish_partition(std::vector<std::uint8_t>&& assign) {
  SectorPartition out;
  out.sector_of_tower = std::move(assign);
  for (std::uint32_t i = 0; i < out.sector_of_tower.size(); ++i)
    out.towers_in[out.sector_of_tower[i]].push_back(i);
  return out;
}
}  // namespace detail

// Explicit mapping, CSV columns: tower_id, sector_name. Every tower must be
// mapped exactly once.
inline SectorPartition build_sectors_from_csv(const TowerMap& towers,
                                              const std::string& path) {
  constexpr std::uint8_t unset = 0xFF;
  std::vector<std::uint8_t> assign(towers.size(), unset);
  const std::string text = read_file(path);
  for_each_line(text, [&](std::uint64_t line_no, std::string_view line) {
    if (line.empty() || line.front() == '#') return;
    std::string_view f[3];
    if (split_fields(line, f, 2) != 2)
      throw MalformedLine(path + ":" + std::to_string(line_no) +
                          ": expected tower_id,sector");
    const auto tower = towers.find(f[0]);
    if (!tower)
      throw UnknownTower(path + ":" + std::to_string(line_no) +
                         ": unknown tower " + std::string(f[0]));
    const auto sector = parse_sector_name(f[1]);
    if (!sector)
      throw MalformedLine(path + ":" + std::to_string(line_no) +
                          ": unknown sector name " + std::string(f[1]));
    std::uint8_t& slot = assign[*tower];
    const auto value = static_cast<std::uint8_t>(*sector);
    if (slot != unset && slot != value)
      throw OverlappingConfig(path + ":" + std::to_string(line_no) +
                              ": tower " + std::string(f[0]) +
                              " mapped to two sectors");
    slot = value;
  });
  for (std::uint32_t i = 0; i < assign.size(); ++i)
    if (assign[i] == unset)
      throw UnmappedTower(path + ": tower " + towers.tower(i).id +
                          " has no sector");
  return detail::finish_partition(std::move(assign));
}

struct CenterRect {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
};

// Default core region: the middle third of the tower bounding box.
inline CenterRect default_center_rect(const TowerMap& towers) {
  const BoundingBox& bb = towers.bbox();
  const double wx = (bb.max_x - bb.min_x) / 3.0;
  const double wy = (bb.max_y - bb.min_y) / 3.0;
  return CenterRect{bb.min_x + wx, bb.min_y + wy, bb.max_x - wx, bb.max_y - wy};
}

inline CenterRect center_rect_from_kv(const KeyValueFile& kv,
                                      const TowerMap& towers) {
  CenterRect dflt = default_center_rect(towers);
  return CenterRect{kv.get_double_or("sector_rect_min_x", dflt.min_x),
                    kv.get_double_or("sector_rect_min_y", dflt.min_y),
                    kv.get_double_or("sector_rect_max_x", dflt.max_x),
                    kv.get_double_or("sector_rect_max_y", dflt.max_y)};
}

// Geometric default: towers inside the core rectangle are `center`; the rest
// split into N/S/E/W by the angle of their offset from the rectangle's
// centroid, with quadrant boundaries on the +-45 degree diagonals
// (half-open toward the counterclockwise side).
inline SectorPartition build_sectors_geometric(const TowerMap& towers,
                                               const CenterRect& rect) {
  std::vector<std::uint8_t> assign(towers.size());
  const double cx = 0.5 * (rect.min_x + rect.max_x);
  const double cy = 0.5 * (rect.min_y + rect.max_y);
  constexpr double q = std::numbers::pi / 4.0;
  for (std::uint32_t i = 0; i < towers.size(); ++i) {
    const Tower& t = towers.tower(i);
    SectorId s;
    if (rect.contains(t.x, t.y)) {
      s = SectorId::center;
    } else {
      const double a = std::atan2(t.y - cy, t.x - cx);  // (-pi, pi]
      if (a >= -q && a < q)
        s = SectorId::east;
      else if (a >= q && a < 3 * q)
        s = SectorId::north;
      else if (a >= -3 * q && a < -q)
        s = SectorId::south;
      else
        s = SectorId::west;
    }
    assign[i] = static_cast<std::uint8_t>(s);
  }
  return detail::finish_partition(std::move(assign));
}

}  // namespace cdrmob

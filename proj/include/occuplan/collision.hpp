#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <utility>

#include "occuplan/raster.hpp"
#include "occuplan/t2nod.hpp"

namespace occuplan {

/// An ego footprint at a frame index, the unit of collision checking.
struct CollisionQuery {
  PixelMask mask;
  int time = 0;
};

/// True iff time t falls in the closed occupancy window [o, d]. An infinite
/// departure keeps the pixel blocked for every t >= o.
inline bool window_contains(std::uint32_t occupancy, std::uint32_t departure,
                            int t) {
  if (t < 0 || occupancy == kTimeInfinity) return false;
  const auto ut = static_cast<std::uint32_t>(t);
  return occupancy <= ut && ut <= departure;
}

/// True iff the closed frame interval [t0, t1] intersects the window.
inline bool window_overlaps(std::uint32_t occupancy, std::uint32_t departure,
                            int t0, int t1) {
  if (t1 < 0 || occupancy == kTimeInfinity) return false;
  const auto u0 = static_cast<std::uint32_t>(std::max(t0, 0));
  const auto u1 = static_cast<std::uint32_t>(t1);
  return occupancy <= u1 && u0 <= departure;
}

/// True iff any footprint pixel's occupancy window contains the query time.
/// Only pixels where the mask is true participate.
bool check_t2nod(const CollisionQuery& query, const TimeField& occupancy,
                 const TimeField& departure);
bool check_t2nod(const PixelMask& mask, int time, const TimeField& occupancy,
                 const TimeField& departure);

/// Same check against a multi-window occupancy list; a window with an
/// infinite departure is open-ended.
bool check_occupancy_list(const CollisionQuery& query,
                          const OccupancyList& list);
bool check_occupancy_list(const PixelMask& mask, int time,
                          const OccupancyList& list);

/// Smallest time among the given (time, footprint) pairs whose check fires,
/// or nullopt. Times must be strictly increasing.
std::optional<int> first_collision_time(
    std::span<const std::pair<int, PixelMask>> footprints,
    const TimeField& occupancy, const TimeField& departure);

}  // namespace occuplan

#include "occuplan/collision.hpp"

#include <stdexcept>

namespace occuplan {

namespace {

void check_dims(const PixelMask& mask, int h, int w, const char* what) {
  if (mask.height() != h || mask.width() != w) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

bool check_t2nod(const PixelMask& mask, int time, const TimeField& occupancy,
                 const TimeField& departure) {
  check_dims(mask, occupancy.height(), occupancy.width(), "check_t2nod");
  if (departure.height() != occupancy.height() ||
      departure.width() != occupancy.width()) {
    throw std::invalid_argument("check_t2nod: field dimension mismatch");
  }
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j) &&
          window_contains(occupancy.at(i, j), departure.at(i, j), time)) {
        return true;
      }
    }
  }
  return false;
}

bool check_t2nod(const CollisionQuery& query, const TimeField& occupancy,
                 const TimeField& departure) {
  return check_t2nod(query.mask, query.time, occupancy, departure);
}

bool check_occupancy_list(const PixelMask& mask, int time,
                          const OccupancyList& list) {
  check_dims(mask, list.height(), list.width(), "check_occupancy_list");
  if (time < 0) return false;
  const auto ut = static_cast<std::uint32_t>(time);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (!mask.at(i, j)) continue;
      for (int k = 0; k + 1 < list.capacity(); k += 2) {
        const std::uint32_t occ = list.at(i, j, k);
        if (occ == kTimeInfinity) break;
        const std::uint32_t dep = list.at(i, j, k + 1);
        if (occ <= ut && ut <= dep) return true;
      }
    }
  }
  return false;
}

bool check_occupancy_list(const CollisionQuery& query,
                          const OccupancyList& list) {
  return check_occupancy_list(query.mask, query.time, list);
}

std::optional<int> first_collision_time(
    std::span<const std::pair<int, PixelMask>> footprints,
    const TimeField& occupancy, const TimeField& departure) {
  for (std::size_t k = 1; k < footprints.size(); ++k) {
    if (footprints[k].first <= footprints[k - 1].first) {
      throw std::invalid_argument(
          "first_collision_time: times must be strictly increasing");
    }
  }
  for (const auto& [time, mask] : footprints) {
    if (check_t2nod(mask, time, occupancy, departure)) return time;
  }
  return std::nullopt;
}

}  // namespace occuplan

#include "occuplan/ego_mask.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace occuplan {

double wrap_to_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

std::array<Vec2, 4> vehicle_vertices(const Pose& pose,
                                     const VehicleShape& shape) {
  if (!(shape.length > 0.0) || !(shape.width > 0.0)) {
    throw std::invalid_argument("vehicle_vertices: shape must be positive");
  }
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double hl = 0.5 * shape.length;
  const double hw = 0.5 * shape.width;
  const std::array<Vec2, 4> body = {
      Vec2{hl, hw}, Vec2{-hl, hw}, Vec2{-hl, -hw}, Vec2{hl, -hw}};
  std::array<Vec2, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = {c * body[k].x - s * body[k].y + pose.position.x,
              s * body[k].x + c * body[k].y + pose.position.y};
  }
  return out;
}

PixelMask mask_for_pose(const GridGeometry& geometry, const Pose& pose,
                        const VehicleShape& shape) {
  const auto world = vehicle_vertices(pose, shape);
  std::array<Vec2, 4> px;
  for (std::size_t k = 0; k < 4; ++k) {
    px[k] = geometry.sp2px_continuous(world[k]);
  }
  return fill_polygon(geometry, px);
}

}  // namespace occuplan

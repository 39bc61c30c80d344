#include "occuplan/grid_geometry.hpp"

#include <algorithm>

namespace occuplan {
namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

GridGeometry::GridGeometry(int height, int width, Vec2 origin,
                           double resolution, double frame_period)
    : height_(height),
      width_(width),
      origin_(origin),
      resolution_(resolution),
      frame_period_(frame_period) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("GridGeometry: height and width must be >= 1");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("GridGeometry: resolution must be > 0");
  }
  if (!(frame_period > 0.0)) {
    throw std::invalid_argument("GridGeometry: frame_period must be > 0");
  }
}

Vec2 GridGeometry::px2sp(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) {
    throw std::out_of_range("px2sp: pixel index (" + std::to_string(row) +
                            ", " + std::to_string(col) + ") outside " +
                            std::to_string(height_) + "x" +
                            std::to_string(width_) + " grid");
  }
  return {origin_.x + resolution_ * col, origin_.y + resolution_ * row};
}

PixelIndex GridGeometry::sp2px(Vec2 p) const {
  const int row = round_half_up((p.y - origin_.y) / resolution_);
  const int col = round_half_up((p.x - origin_.x) / resolution_);
  if (row < 0 || row >= height_ || col < 0 || col >= width_) {
    const PixelIndex clamped{std::clamp(row, 0, height_ - 1),
                             std::clamp(col, 0, width_ - 1)};
    throw OutOfGridError("sp2px: point (" + std::to_string(p.x) + ", " +
                             std::to_string(p.y) + ") outside grid extent",
                         clamped);
  }
  return {row, col};
}

}  // namespace occuplan

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace occuplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct PixelIndex {
  int row = 0;
  int col = 0;

  friend bool operator==(PixelIndex a, PixelIndex b) {
    return a.row == b.row && a.col == b.col;
  }
};

/// Thrown by sp2px for points outside the grid extent. Carries the index
/// clamped to the grid so callers may opt to clamp instead of failing.
class OutOfGridError : public std::out_of_range {
 public:
  OutOfGridError(const std::string& what, PixelIndex clamped)
      : std::out_of_range(what), clamped_(clamped) {}

  PixelIndex clamped() const { return clamped_; }

 private:
  PixelIndex clamped_;
};

/// Invertible mapping between pixel indices and world coordinates for a
/// top-down grid of square pixels, plus the time discretization shared by
/// the rest of the pipeline. Pixel (0,0) is top-left; the row index runs
/// along the second world axis. Immutable after construction.
class GridGeometry {
 public:
  GridGeometry(int height, int width, Vec2 origin, double resolution,
               double frame_period);

  int height() const { return height_; }
  int width() const { return width_; }
  Vec2 origin() const { return origin_; }
  double resolution() const { return resolution_; }
  double frame_period() const { return frame_period_; }

  bool contains(PixelIndex p) const {
    return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
  }

  /// World-space center of pixel (row, col). Throws std::out_of_range for
  /// indices outside the grid.
  Vec2 px2sp(int row, int col) const;
  Vec2 px2sp(PixelIndex p) const { return px2sp(p.row, p.col); }

  /// Nearest-pixel-center inverse of px2sp, rounding half up on each axis.
  /// Throws OutOfGridError (carrying the clamped index) when the rounded
  /// index falls outside the grid.
  PixelIndex sp2px(Vec2 p) const;

  /// Fractional pixel coordinates (x = column, y = row) of a world point.
  /// No rounding, no bounds check; used when quantization must be deferred
  /// to the rasterizer.
  Vec2 sp2px_continuous(Vec2 p) const {
    return {(p.x - origin_.x) / resolution_, (p.y - origin_.y) / resolution_};
  }

  double frame_to_seconds(int frame) const { return frame * frame_period_; }
  int seconds_to_frame(double seconds) const {
    return static_cast<int>(std::floor(seconds / frame_period_ + 0.5));
  }

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.origin_ == b.origin_ && a.resolution_ == b.resolution_ &&
           a.frame_period_ == b.frame_period_;
  }

 private:
  int height_;
  int width_;
  Vec2 origin_;
  double resolution_;
  double frame_period_;
};

}  // namespace occuplan

#pragma once

#include <span>
#include <vector>

#include "occuplan/grid_geometry.hpp"

namespace occuplan {

/// A point on a timed trajectory.
struct SpaceTimePoint {
  double time = 0.0;
  Vec2 position;
};

/// 1-D natural cubic spline (zero second derivative at both ends) over
/// strictly increasing knots. Two knots degenerate to linear interpolation.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::span<const double> ts, std::span<const double> ys);

  double value(double t) const;
  double derivative(double t) const;

  double start() const { return ts_.front(); }
  double end() const { return ts_.back(); }

 private:
  std::size_t segment(double t) const;

  std::vector<double> ts_;
  std::vector<double> ys_;
  std::vector<double> second_derivs_;
};

/// Time-parameterized 2-D curve built from one natural spline per world
/// axis; evaluation outside the knot range clamps to the endpoints.
class TimedSpline2d {
 public:
  explicit TimedSpline2d(std::span<const SpaceTimePoint> points);

  Vec2 position(double t) const;
  Vec2 velocity(double t) const;

  double start_time() const { return start_; }
  double end_time() const { return end_; }

 private:
  NaturalCubicSpline x_;
  NaturalCubicSpline y_;
  double start_;
  double end_;
};

/// Densifies a timed path with a natural cubic spline per axis: every input
/// point is reproduced exactly and each input interval is resampled into
/// samples_per_segment uniform steps (the final knot closes the output).
/// Requires >= 2 points with strictly increasing times.
std::vector<SpaceTimePoint> smooth_path(std::span<const SpaceTimePoint> points,
                                        int samples_per_segment);

}  // namespace occuplan

#include "occuplan/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace occuplan {

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> ts,
                                       std::span<const double> ys)
    : ts_(ts.begin(), ts.end()), ys_(ys.begin(), ys.end()) {
  if (ts_.size() != ys_.size() || ts_.size() < 2) {
    throw std::invalid_argument("NaturalCubicSpline: need >= 2 knots");
  }
  const std::size_t n = ts_.size();
  for (std::size_t k = 1; k < n; ++k) {
    if (!(ts_[k] > ts_[k - 1])) {
      throw std::invalid_argument(
          "NaturalCubicSpline: knot times must be strictly increasing");
    }
  }

  // Solve the tridiagonal system for interior second derivatives (Thomas
  // algorithm); natural boundaries pin both ends to zero.
  second_derivs_.assign(n, 0.0);
  if (n > 2) {
    const std::size_t m = n - 2;
    std::vector<double> diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double h0 = ts_[k + 1] - ts_[k];
      const double h1 = ts_[k + 2] - ts_[k + 1];
      diag[k] = 2.0 * (h0 + h1);
      upper[k] = h1;
      rhs[k] = 6.0 * ((ys_[k + 2] - ys_[k + 1]) / h1 -
                      (ys_[k + 1] - ys_[k]) / h0);
    }
    for (std::size_t k = 1; k < m; ++k) {
      const double lower = ts_[k + 1] - ts_[k];
      const double factor = lower / diag[k - 1];
      diag[k] -= factor * upper[k - 1];
      rhs[k] -= factor * rhs[k - 1];
    }
    second_derivs_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k >= 1; --k) {
      second_derivs_[k] =
          (rhs[k - 1] - upper[k - 1] * second_derivs_[k + 1]) / diag[k - 1];
    }
  }
}

std::size_t NaturalCubicSpline::segment(double t) const {
  if (t <= ts_.front()) return 0;
  if (t >= ts_.back()) return ts_.size() - 2;
  const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  return static_cast<std::size_t>(it - ts_.begin()) - 1;
}

double NaturalCubicSpline::value(double t) const {
  const std::size_t k = segment(t);
  const double h = ts_[k + 1] - ts_[k];
  const double a = (ts_[k + 1] - t) / h;
  const double b = (t - ts_[k]) / h;
  return a * ys_[k] + b * ys_[k + 1] +
         ((a * a * a - a) * second_derivs_[k] +
          (b * b * b - b) * second_derivs_[k + 1]) *
             (h * h) / 6.0;
}

double NaturalCubicSpline::derivative(double t) const {
  const std::size_t k = segment(t);
  const double h = ts_[k + 1] - ts_[k];
  const double a = (ts_[k + 1] - t) / h;
  const double b = (t - ts_[k]) / h;
  return (ys_[k + 1] - ys_[k]) / h +
         ((3.0 * b * b - 1.0) * second_derivs_[k + 1] -
          (3.0 * a * a - 1.0) * second_derivs_[k]) *
             h / 6.0;
}

namespace {

std::vector<double> times_of(std::span<const SpaceTimePoint> points) {
  std::vector<double> ts(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) ts[k] = points[k].time;
  return ts;
}

std::vector<double> axis_of(std::span<const SpaceTimePoint> points, bool x) {
  std::vector<double> vs(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    vs[k] = x ? points[k].position.x : points[k].position.y;
  }
  return vs;
}

}  // namespace

TimedSpline2d::TimedSpline2d(std::span<const SpaceTimePoint> points)
    : x_(times_of(points), axis_of(points, true)),
      y_(times_of(points), axis_of(points, false)),
      start_(points.front().time),
      end_(points.back().time) {}

Vec2 TimedSpline2d::position(double t) const {
  const double tc = std::clamp(t, start_, end_);
  return {x_.value(tc), y_.value(tc)};
}

Vec2 TimedSpline2d::velocity(double t) const {
  const double tc = std::clamp(t, start_, end_);
  return {x_.derivative(tc), y_.derivative(tc)};
}

std::vector<SpaceTimePoint> smooth_path(std::span<const SpaceTimePoint> points,
                                        int samples_per_segment) {
  if (points.size() < 2) {
    throw std::invalid_argument("smooth_path: need >= 2 points");
  }
  if (samples_per_segment < 1) {
    throw std::invalid_argument("smooth_path: samples_per_segment must be >= 1");
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (!(points[k].time > points[k - 1].time)) {
      throw std::invalid_argument("smooth_path: duplicate or decreasing times");
    }
  }
  const TimedSpline2d spline(points);
  std::vector<SpaceTimePoint> out;
  out.reserve((points.size() - 1) * samples_per_segment + 1);
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double t0 = points[k].time;
    const double t1 = points[k + 1].time;
    for (int m = 0; m < samples_per_segment; ++m) {
      const double t = t0 + (t1 - t0) * m / samples_per_segment;
      // knots are reproduced exactly, not through spline round-off
      if (m == 0) {
        out.push_back(points[k]);
      } else {
        out.push_back({t, spline.position(t)});
      }
    }
  }
  out.push_back(points.back());
  return out;
}

}  // namespace occuplan

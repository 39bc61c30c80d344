#pragma once

#include <array>

#include "occuplan/grid_geometry.hpp"
#include "occuplan/raster.hpp"

namespace occuplan {

/// Rectangular vehicle body, length along the heading axis.
struct VehicleShape {
  double length = 0.0;
  double width = 0.0;
};

/// 2-D position plus heading (radians, counterclockwise from the first
/// world axis, kept in (-pi, pi]) at a frame index.
struct Pose {
  Vec2 position;
  double heading = 0.0;
  int time = 0;
};

/// Wraps an angle into (-pi, pi].
double wrap_to_pi(double angle);

/// Corners of the vehicle body at the given pose, arranged
/// counterclockwise starting at the front-left corner for heading 0.
std::array<Vec2, 4> vehicle_vertices(const Pose& pose,
                                     const VehicleShape& shape);

/// Pixels covered by the vehicle footprint. The corner conversion keeps
/// fractional pixel coordinates so the rasterizer sees the exact rectangle;
/// footprints outside the grid yield an all-false mask. Bodies smaller than
/// one pixel may cover no pixel center at all.
PixelMask mask_for_pose(const GridGeometry& geometry, const Pose& pose,
                        const VehicleShape& shape);

}  // namespace occuplan

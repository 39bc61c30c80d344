#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "occuplan/ego_mask.hpp"
#include "occuplan/grid_geometry.hpp"
#include "occuplan/raster.hpp"
#include "occuplan/spline.hpp"
#include "occuplan/t2nod.hpp"

namespace occuplan {

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(Cell a, Cell b) {
    return a.row == b.row && a.col == b.col;
  }
};

struct PlannerConfig {
  int connectivity = 8;  // 4 or 8
  double speed = 1.0;    // uniform travel speed, m/s
  /// Evaluation-function penalty applied to nodes that check as colliding.
  /// Zero disables the penalty.
  double collision_penalty = 1.0e6;
  std::size_t max_expansions = 500000;
  /// Allow staying in place for one frame as a successor (time-aware
  /// searches only).
  bool allow_wait = false;
  /// Waits are generated only while the node frame is below this bound;
  /// negative means unbounded.
  int max_wait_frame = -1;
};

/// Default penalty weight: large enough that any in-collision node is
/// dominated by every collision-free detour on the grid.
double default_collision_penalty(const GridGeometry& geometry);

/// Search node exposed for time accounting along parent chains.
struct PlanNode {
  Cell cell;
  int frame = 0;
  double g = 0.0;          // accumulated path time, seconds
  double f = 0.0;          // evaluation value at insertion
  double edge_time = 0.0;  // traversal time of the edge from parent
  const PlanNode* parent = nullptr;
  int direction = -1;           // incoming edge direction (search internal)
  bool in_collision = false;    // window check result at this node
};

/// Total traversal time accumulated by walking parent links from node back
/// to start. Throws std::logic_error on a detached or cyclic chain.
double find_parent(const PlanNode& node, const PlanNode& start);

struct CellPathResult {
  std::optional<std::vector<Cell>> path;
  bool budget_exhausted = false;
  std::size_t expansions = 0;
};

struct TimedPathResult {
  std::optional<std::vector<SpaceTimePoint>> path;
  bool budget_exhausted = false;
  std::size_t expansions = 0;
};

/// A* over a static obstacle grid with Euclidean heuristic and edge costs
/// {1, sqrt2} * resolution / speed. Ties break on smaller heuristic, then
/// row-major cell order, so repeated runs return identical paths.
CellPathResult classical_astar(const PixelMask& obstacles, Cell start,
                               Cell goal, const PlannerConfig& config,
                               const GridGeometry& geometry);

/// A dynamic obstacle described by a sampling function from time in seconds
/// to the set of cells it occupies.
struct ObstacleTrajectory {
  std::function<std::vector<Cell>(double seconds)> sample;
};

/// Time-aware A* against sampled obstacle trajectories. States are
/// (cell, frame index) pairs so a cell blocked now can be used later;
/// successor times are the parent time plus the edge traversal time,
/// rounded to the nearest frame for obstacle sampling. With paper_literal
/// set, states collapse to bare cells and obstacle cells sampled at the
/// expanded node's accumulated time are closed only for that expansion.
TimedPathResult dynamic_astar(const PixelMask& static_obstacles,
                              std::span<const ObstacleTrajectory> obstacles,
                              Cell start, Cell goal,
                              const PlannerConfig& config,
                              const GridGeometry& geometry,
                              bool paper_literal = false);

/// Best-first search over (cell, frame) states scored by accumulated time
/// plus a time-varying term: Euclidean distance-to-goal time plus
/// collision_penalty whenever the ego footprint at the candidate cell
/// overlaps an occupancy window at the candidate time. The footprint
/// heading follows the incoming edge direction (start_heading at the start
/// node). A returned path never collides under the window check; if only
/// colliding routes exist the search reports no path.
TimedPathResult t2nod_astar(const TimeField& occupancy,
                            const TimeField& departure,
                            const PixelMask& static_obstacles, Cell start,
                            Cell goal, const PlannerConfig& config,
                            const VehicleShape& shape,
                            const GridGeometry& geometry,
                            double start_heading);

/// A trajectory sample with orientation, the unit of path serialization.
struct TimedPose {
  double time = 0.0;
  Vec2 position;
  double heading = 0.0;
};

/// Headings along a timed path from the motion direction, falling back to
/// the previous heading while stationary.
std::vector<TimedPose> attach_headings(std::span<const SpaceTimePoint> points,
                                       double initial_heading);

// CSV with header t_s,x_m,y_m,heading_rad; values round-trip exactly.
void write_timed_path_csv(std::ostream& out, std::span<const TimedPose> path);
std::vector<TimedPose> read_timed_path_csv(std::istream& in);

}  // namespace occuplan

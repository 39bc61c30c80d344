#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occuplan/ego_mask.hpp"
#include "occuplan/grid_geometry.hpp"
#include "occuplan/multi_view.hpp"
#include "occuplan/planner.hpp"
#include "occuplan/raster.hpp"
#include "occuplan/t2nod.hpp"

namespace occuplan {

/// A traffic participant following a waypoint polyline at constant speed.
/// It becomes visible at start_time and disappears once the route is done
/// (zero-speed agents park at the first waypoint indefinitely).
struct Agent {
  VehicleShape shape;
  std::vector<Vec2> route;
  double speed = 0.0;
  Rgb color{200, 40, 40};
  double start_time = 0.0;

  double duration() const;
  bool active(double seconds) const;
  Pose pose_at(double seconds) const;
};

enum class PlannerMode { kT2nod, kDynamic, kClassical, kPaperLiteral };

PlannerMode planner_mode_from_string(const std::string& name);
std::string to_string(PlannerMode mode);

struct EgoConfig {
  VehicleShape shape{3.0, 1.6};
  Pose start;
  Vec2 goal;
  double speed = 2.5;
  double goal_tolerance = 0.25;
  /// Added to both body dimensions for planner collision checks only;
  /// ground-truth contact always uses the true shape.
  double check_padding = 0.0;
  PlannerConfig planner;
  PlannerMode mode = PlannerMode::kT2nod;

  VehicleShape padded_shape() const {
    return {shape.length + check_padding, shape.width + check_padding};
  }
};

struct SceneColors {
  Rgb road{90, 90, 90};
  Rgb offroad{34, 110, 46};
  Rgb ego{160, 160, 160};
};

/// Randomized-traffic generator settings used by batch runs: count agents
/// with a random route choice, speed and start time per episode.
struct TrafficConfig {
  int count = 0;
  std::vector<std::vector<Vec2>> routes;
  double speed_min = 8.0;
  double speed_max = 12.0;
  double start_min = 0.0;
  double start_max = 10.0;
  VehicleShape shape{4.5, 2.0};
  Rgb color{200, 40, 40};
};

struct MultiViewConfig {
  std::vector<GridGeometry> views;
  /// When set, canvas pixels no view observes are planned around as static
  /// obstacles instead of free space.
  bool unobserved_occupied = false;
};

struct Scenario {
  std::string name;
  GridGeometry geometry{1, 1, {0, 0}, 1.0, 0.1};
  PixelMask road_mask;
  SceneColors colors;
  std::vector<Agent> agents;
  EgoConfig ego;
  int horizon = 60;
  int replan_period = 1;
  int background_window = 600;
  Thresholds thresholds;
  int list_capacity = 4;
  std::vector<int> field_horizons{2, 10, 20, 30, 60};
  int max_frames = 1000;
  std::optional<TrafficConfig> traffic;
  std::optional<MultiViewConfig> multi_view;
};

/// Parses and validates a scenario document. Unknown fields are rejected;
/// overrides are dotted-path key=value pairs applied between parsing and
/// validation (CLI > file > defaults).
Scenario load_scenario(const std::filesystem::path& path,
                       std::span<const std::string> overrides = {});
Scenario parse_scenario(const std::string& text,
                        std::span<const std::string> overrides = {});

/// Deterministic agents for one randomized-traffic episode.
std::vector<Agent> randomize_traffic(const TrafficConfig& config,
                                     std::uint64_t seed);

/// Stream seeded from a master seed and a stream index; used so batch
/// episodes draw independent, reproducible randomness.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace occuplan

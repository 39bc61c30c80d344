#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "occuplan/scenario.hpp"
#include "occuplan/spline.hpp"

namespace occuplan {

enum class Outcome { kGoalReached, kTimeout, kNeverStarted };

std::string to_string(Outcome outcome);

struct CollisionEvent {
  int frame = 0;
  int agent = 0;
};

struct AgentState {
  int agent = 0;
  Vec2 position;
  double heading = 0.0;
};

struct PlanLogEntry {
  int frame = 0;
  std::vector<SpaceTimePoint> points;  // times relative to the replan frame
};

/// Complete, time-ordered trace of one episode.
struct RunRecord {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::string mode;
  double frame_period = 0.1;
  Vec2 goal;
  Outcome outcome = Outcome::kTimeout;
  std::vector<TimedPose> ego;                    // pose per frame
  std::vector<std::vector<AgentState>> agents;   // active agents per frame
  std::vector<PlanLogEntry> plans;
  std::vector<CollisionEvent> collisions;
};

/// Renders the scripted world at a frame: road and off-road colors, then
/// every active agent. include_ego draws the ego at its scenario start
/// pose.
Frame render_frame(const Scenario& scenario, int frame, bool include_ego);
/// World without the ego.
Frame render_world(const Scenario& scenario, int frame);
/// World plus the ego at an explicit pose (episode playback).
Frame render_with_ego(const Scenario& scenario, int frame, const Pose& ego);

/// Ground-truth prediction oracle: exact future renders at frames
/// now..now+horizon with the ego excluded, so the resulting fields describe
/// only the other road users.
std::vector<Frame> oracle_predict(const Scenario& scenario, int now,
                                  int horizon);

/// Background image for the scenario camera: pixel-wise average of the
/// first background_window world frames.
Frame scenario_background(const Scenario& scenario);

/// Occupancy fields for a prediction starting at the given frame. With a
/// multi-view layout the per-view fields are stitched onto the canvas;
/// otherwise the canvas is a single view. The mask marks observed pixels.
struct FieldResult {
  TimeField occupancy;
  TimeField departure;
  PixelMask observed;
};
FieldResult compute_fields(const Scenario& scenario, const Frame& background,
                           int now, int horizon);

/// Runs the receding-horizon loop: every replan_period frames the oracle
/// prediction is refreshed, fields are rebuilt, and the configured planner
/// produces a path that the ego then tracks along a cubic spline at
/// uniform speed. Ground-truth collisions (footprint overlap with any
/// agent) are recorded without ending the episode; the episode ends at the
/// goal, the frame cap, or an infeasible first plan.
RunRecord run_episode(const Scenario& scenario);

struct Metrics {
  bool success = false;
  int collisions = 0;
  double travel_distance = 0.0;
  std::optional<int> timesteps;
  std::optional<double> control_effort;
  std::optional<int> sudden_reversals;
};

/// Six-way episode summary. Accelerations come from central finite
/// differences of the recorded trajectory; records shorter than three
/// frames leave effort and reversal counts unset. Travel distance counts
/// motion up to the first ground-truth collision, if any.
Metrics compute_metrics(const RunRecord& record);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

struct BatchSummary {
  int episodes = 0;
  double success_rate = 0.0;  // percent
  Aggregate collisions;
  Aggregate timesteps;
  Aggregate control_effort;
  Aggregate sudden_reversals;
  Aggregate travel_distance;
};

/// Mean and sample standard deviation per metric. Success rate and travel
/// distance aggregate over all episodes; the remaining metrics only over
/// successful ones, where they are well defined.
BatchSummary aggregate_metrics(std::span<const Metrics> metrics);

std::string format_batch_table(const BatchSummary& summary);

}  // namespace occuplan

#include "occuplan/traffic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "occuplan/collision.hpp"

namespace occuplan {

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kGoalReached:
      return "goal_reached";
    case Outcome::kTimeout:
      return "timeout";
    case Outcome::kNeverStarted:
      return "never_started";
  }
  return "timeout";
}

namespace {

Frame render_internal(const Scenario& sc, int frame, const Pose* ego_pose) {
  const GridGeometry& g = sc.geometry;
  Frame img(g.height(), g.width(), sc.colors.offroad, frame);
  for (int i = 0; i < g.height(); ++i) {
    for (int j = 0; j < g.width(); ++j) {
      if (sc.road_mask.at(i, j)) img.set(i, j, sc.colors.road);
    }
  }
  const double seconds = g.frame_to_seconds(frame);
  auto paint = [&](const PixelMask& mask, Rgb color) {
    for (int i = 0; i < g.height(); ++i) {
      for (int j = 0; j < g.width(); ++j) {
        if (mask.at(i, j)) img.set(i, j, color);
      }
    }
  };
  for (const Agent& agent : sc.agents) {
    if (!agent.active(seconds)) continue;
    paint(mask_for_pose(g, agent.pose_at(seconds), agent.shape), agent.color);
  }
  if (ego_pose != nullptr) {
    paint(mask_for_pose(g, *ego_pose, sc.ego.shape), sc.colors.ego);
  }
  return img;
}

}  // namespace

Frame render_world(const Scenario& scenario, int frame) {
  return render_internal(scenario, frame, nullptr);
}

Frame render_frame(const Scenario& scenario, int frame, bool include_ego) {
  if (!include_ego) return render_world(scenario, frame);
  return render_internal(scenario, frame, &scenario.ego.start);
}

Frame render_with_ego(const Scenario& scenario, int frame, const Pose& ego) {
  return render_internal(scenario, frame, &ego);
}

std::vector<Frame> oracle_predict(const Scenario& scenario, int now,
                                  int horizon) {
  if (now < 0 || horizon < 0) {
    throw std::invalid_argument("oracle_predict: negative frame or horizon");
  }
  std::vector<Frame> frames;
  frames.reserve(horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    frames.push_back(render_world(scenario, now + t));
  }
  return frames;
}

Frame scenario_background(const Scenario& scenario) {
  std::vector<Frame> window;
  window.reserve(scenario.background_window);
  for (int t = 0; t < scenario.background_window; ++t) {
    window.push_back(render_world(scenario, t));
  }
  return estimate_background(window);
}

namespace {

Frame crop(const Frame& src, int row_offset, int col_offset, int h, int w) {
  Frame out(h, w, {0, 0, 0}, src.timestamp());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      out.set(i, j, src.at(row_offset + i, col_offset + j));
    }
  }
  return out;
}

}  // namespace

namespace {

FieldResult compute_fields_from(const Scenario& scenario,
                                const Frame& background,
                                std::span<const Frame> frames);

// Per-episode memo of world renders; a frame is rendered once even though
// consecutive replans request overlapping horizons.
class WorldCache {
 public:
  explicit WorldCache(const Scenario& scenario) : scenario_(scenario) {}

  const Frame& at(int frame) {
    const auto it = frames_.find(frame);
    if (it != frames_.end()) return it->second;
    return frames_.emplace(frame, render_world(scenario_, frame))
        .first->second;
  }

  std::vector<Frame> window(int from, int count) {
    std::vector<Frame> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) out.push_back(at(from + k));
    return out;
  }

 private:
  const Scenario& scenario_;
  std::unordered_map<int, Frame> frames_;
};

}  // namespace

FieldResult compute_fields(const Scenario& scenario, const Frame& background,
                           int now, int horizon) {
  const std::vector<Frame> frames = oracle_predict(scenario, now, horizon);
  return compute_fields_from(scenario, background, frames);
}

namespace {

FieldResult compute_fields_from(const Scenario& scenario,
                                const Frame& background,
                                std::span<const Frame> frames) {
  if (!scenario.multi_view) {
    auto [occ, dep] =
        compute_t2no_t2nd(frames, background, scenario.thresholds);
    return {std::move(occ), std::move(dep),
            PixelMask(scenario.geometry.height(), scenario.geometry.width(),
                      true)};
  }

  const ViewLayout layout =
      make_layout(scenario.geometry, scenario.multi_view->views);
  std::vector<std::pair<TimeField, TimeField>> fields;
  for (const ViewPlacement& view : layout.views()) {
    const int h = view.geometry.height();
    const int w = view.geometry.width();
    std::vector<Frame> view_frames;
    view_frames.reserve(frames.size());
    for (const Frame& f : frames) {
      view_frames.push_back(crop(f, view.row_offset, view.col_offset, h, w));
    }
    const Frame view_bg =
        crop(background, view.row_offset, view.col_offset, h, w);
    fields.push_back(
        compute_t2no_t2nd(view_frames, view_bg, scenario.thresholds));
  }
  StitchedFields stitched = stitch_fields(layout, fields);
  return {std::move(stitched.occupancy), std::move(stitched.departure),
          std::move(stitched.observed)};
}

// Planning against a single (O, D) pair per pixel is blind to second
// transits inside the horizon: the pair only describes the first window.
// The episode planner therefore uses the hull of all windows recorded in
// the occupancy list — first occupancy to last known departure, open-ended
// when the list saturates — which is conservative exactly where several
// road users cross one pixel.
std::pair<TimeField, TimeField> hull_fields(const OccupancyList& list) {
  const int h = list.height();
  const int w = list.width();
  TimeField occupancy(h, w);
  TimeField departure(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::uint32_t first = list.at(i, j, 0);
      if (first == kTimeInfinity) continue;
      occupancy.set(i, j, first);
      std::uint32_t last_departure = kTimeInfinity;
      bool saturated = true;
      for (int k = 0; k + 1 < list.capacity(); k += 2) {
        if (list.at(i, j, k) == kTimeInfinity) {
          saturated = false;
          break;
        }
        last_departure = list.at(i, j, k + 1);
        if (last_departure == kTimeInfinity) break;
      }
      departure.set(i, j, saturated ? kTimeInfinity : last_departure);
    }
  }
  return {std::move(occupancy), std::move(departure)};
}

FieldResult compute_plan_fields(const Scenario& scenario,
                                const Frame& background,
                                std::span<const Frame> frames) {
  if (!scenario.multi_view) {
    auto [occ, dep] = hull_fields(compute_occupancy_list(
        frames, background, scenario.thresholds, scenario.list_capacity));
    return {std::move(occ), std::move(dep),
            PixelMask(scenario.geometry.height(), scenario.geometry.width(),
                      true)};
  }
  const ViewLayout layout =
      make_layout(scenario.geometry, scenario.multi_view->views);
  std::vector<std::pair<TimeField, TimeField>> fields;
  for (const ViewPlacement& view : layout.views()) {
    const int h = view.geometry.height();
    const int w = view.geometry.width();
    std::vector<Frame> view_frames;
    view_frames.reserve(frames.size());
    for (const Frame& f : frames) {
      view_frames.push_back(crop(f, view.row_offset, view.col_offset, h, w));
    }
    const Frame view_bg =
        crop(background, view.row_offset, view.col_offset, h, w);
    fields.push_back(hull_fields(compute_occupancy_list(
        view_frames, view_bg, scenario.thresholds, scenario.list_capacity)));
  }
  StitchedFields stitched = stitch_fields(layout, fields);
  return {std::move(stitched.occupancy), std::move(stitched.departure),
          std::move(stitched.observed)};
}

// Obstacle sampling for the dynamic planner: every cell an active agent's
// footprint covers at the sampled time.
std::vector<ObstacleTrajectory> agent_trajectories(const Scenario& sc,
                                                   double now_seconds) {
  std::vector<ObstacleTrajectory> trajectories;
  trajectories.reserve(sc.agents.size());
  for (std::size_t k = 0; k < sc.agents.size(); ++k) {
    const Agent& agent = sc.agents[k];
    const Scenario* scenario = &sc;
    trajectories.push_back(ObstacleTrajectory{
        [scenario, &agent, now_seconds](double rel_seconds) {
          const double t = now_seconds + rel_seconds;
          std::vector<Cell> cells;
          if (!agent.active(t)) return cells;
          const PixelMask mask =
              mask_for_pose(scenario->geometry, agent.pose_at(t), agent.shape);
          for (int i = 0; i < mask.height(); ++i) {
            for (int j = 0; j < mask.width(); ++j) {
              if (mask.at(i, j)) cells.push_back({i, j});
            }
          }
          return cells;
        }});
  }
  return trajectories;
}

// Deterministic fallback when the tracked pose rounds onto a blocked cell:
// the nearest free cell in a small neighborhood, row-major.
Cell free_cell_near(const PixelMask& obstacles, Cell cell,
                    const GridGeometry& geometry) {
  if (geometry.contains({cell.row, cell.col}) &&
      !obstacles.at(cell.row, cell.col)) {
    return cell;
  }
  for (int radius = 1; radius <= 2; ++radius) {
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const Cell c{cell.row + dr, cell.col + dc};
        if (geometry.contains({c.row, c.col}) && !obstacles.at(c.row, c.col)) {
          return c;
        }
      }
    }
  }
  throw std::invalid_argument("planner: no free cell near the ego pose");
}

// Tracking support for plans that contain waits: motion legs are smoothed
// with one spline each, wait runs hold the position exactly. Splining
// across repeated knots would wiggle around the hold point.
class PlanTracker {
 public:
  explicit PlanTracker(std::span<const SpaceTimePoint> points) {
    const std::size_t n = points.size();
    std::size_t k = 0;
    while (k + 1 < n) {
      if (points[k + 1].position == points[k].position) {
        std::size_t j = k + 1;
        while (j + 1 < n && points[j + 1].position == points[k].position) {
          ++j;
        }
        legs_.push_back({points[k].time, points[j].time,
                         points[k].position, std::nullopt});
        k = j;
      } else {
        std::size_t j = k + 1;
        while (j + 1 < n && !(points[j + 1].position == points[j].position)) {
          ++j;
        }
        legs_.push_back({points[k].time, points[j].time, points[k].position,
                         TimedSpline2d(points.subspan(k, j - k + 1))});
        k = j;
      }
    }
    if (legs_.empty()) {
      legs_.push_back({points.front().time, points.front().time,
                       points.front().position, std::nullopt});
    }
    end_position_ = points.back().position;
  }

  Vec2 position(double t) const {
    const Leg* leg = find(t);
    if (leg == nullptr) return end_position_;
    if (!leg->spline) return leg->hold_position;
    return leg->spline->position(t);
  }

  Vec2 velocity(double t) const {
    const Leg* leg = find(t);
    if (leg == nullptr || !leg->spline) return {0.0, 0.0};
    return leg->spline->velocity(t);
  }

 private:
  struct Leg {
    double t0;
    double t1;
    Vec2 hold_position;
    std::optional<TimedSpline2d> spline;
  };

  const Leg* find(double t) const {
    if (t <= legs_.front().t0) return &legs_.front();
    for (const Leg& leg : legs_) {
      if (t <= leg.t1) return &leg;
    }
    return nullptr;  // past the end, park at the final position
  }

  std::vector<Leg> legs_;
  Vec2 end_position_;
};

std::optional<std::vector<SpaceTimePoint>> plan_from(
    const Scenario& sc, const PixelMask& static_obstacles,
    const Frame& background, const Pose& ego, int now_frame,
    WorldCache* cache) {
  const GridGeometry& g = sc.geometry;
  Cell start;
  try {
    const PixelIndex s = g.sp2px(ego.position);
    start = free_cell_near(static_obstacles, {s.row, s.col}, g);
  } catch (const OutOfGridError& e) {
    start = free_cell_near(static_obstacles,
                           {e.clamped().row, e.clamped().col}, g);
  }
  const PixelIndex goal_px = g.sp2px(sc.ego.goal);
  const Cell goal{goal_px.row, goal_px.col};

  std::vector<SpaceTimePoint> points;
  switch (sc.ego.mode) {
    case PlannerMode::kClassical: {
      const CellPathResult result =
          classical_astar(static_obstacles, start, goal, sc.ego.planner, g);
      if (!result.path) return std::nullopt;
      const double straight = g.resolution() / sc.ego.planner.speed;
      double t = 0.0;
      Cell prev = start;
      for (const Cell& c : *result.path) {
        if (!(c == prev)) {
          const bool diagonal = c.row != prev.row && c.col != prev.col;
          t += diagonal ? straight * std::sqrt(2.0) : straight;
        }
        points.push_back({t, g.px2sp(c.row, c.col)});
        prev = c;
      }
      break;
    }
    case PlannerMode::kDynamic:
    case PlannerMode::kPaperLiteral: {
      const auto trajectories =
          agent_trajectories(sc, g.frame_to_seconds(now_frame));
      const TimedPathResult result = dynamic_astar(
          static_obstacles, trajectories, start, goal, sc.ego.planner, g,
          sc.ego.mode == PlannerMode::kPaperLiteral);
      if (!result.path) return std::nullopt;
      points = *result.path;
      break;
    }
    case PlannerMode::kT2nod: {
      const std::vector<Frame> frames =
          cache != nullptr ? cache->window(now_frame, sc.horizon + 1)
                           : oracle_predict(sc, now_frame, sc.horizon);
      const FieldResult fields = compute_plan_fields(sc, background, frames);
      const TimedPathResult result =
          t2nod_astar(fields.occupancy, fields.departure, static_obstacles,
                      start, goal, sc.ego.planner, sc.ego.padded_shape(), g,
                      ego.heading);
      if (!result.path) return std::nullopt;
      points = *result.path;
      break;
    }
  }
  if (points.empty()) return std::nullopt;

  // The grid path starts at the start cell center and ends at the goal cell
  // center; pin both ends to the actual poses so tracking never jumps, and
  // re-time the first edge by the true remaining distance so the tracked
  // speed stays uniform.
  if (points.size() >= 2 &&
      !(points[1].position == points[0].position)) {
    const double remaining = (points[1].position - ego.position).norm();
    if (remaining > 1e-6) {
      const double shift =
          points[1].time - remaining / sc.ego.planner.speed;
      for (std::size_t k = 1; k < points.size(); ++k) {
        points[k].time -= shift;
      }
    } else {
      const double t1 = points[1].time;
      points.erase(points.begin());
      for (SpaceTimePoint& p : points) p.time -= t1;
    }
  }
  points.front().position = ego.position;
  const double tail = (sc.ego.goal - points.back().position).norm();
  if (tail > 1e-9) {
    points.push_back(
        {points.back().time + tail / sc.ego.planner.speed, sc.ego.goal});
  }
  return points;
}

}  // namespace

RunRecord run_episode(const Scenario& scenario) {
  const GridGeometry& g = scenario.geometry;
  const double period = g.frame_period();

  RunRecord record;
  record.scenario_name = scenario.name;
  record.mode = to_string(scenario.ego.mode);
  record.frame_period = period;
  record.goal = scenario.ego.goal;

  WorldCache cache(scenario);
  const Frame background =
      estimate_background(cache.window(0, scenario.background_window));

  PixelMask static_obstacles = scenario.road_mask.complement();
  if (scenario.multi_view && scenario.multi_view->unobserved_occupied) {
    const ViewLayout layout = make_layout(g, scenario.multi_view->views);
    PixelMask observed(g.height(), g.width(), false);
    for (const ViewPlacement& view : layout.views()) {
      for (int i = 0; i < view.geometry.height(); ++i) {
        for (int j = 0; j < view.geometry.width(); ++j) {
          observed.set(view.row_offset + i, view.col_offset + j, true);
        }
      }
    }
    static_obstacles = static_obstacles | observed.complement();
  }

  Pose ego = scenario.ego.start;
  std::optional<PlanTracker> plan;
  double plan_start_seconds = 0.0;
  std::vector<std::uint8_t> in_contact(scenario.agents.size(), 0);

  for (int frame = 0; frame <= scenario.max_frames; ++frame) {
    const double now = g.frame_to_seconds(frame);

    record.ego.push_back({now, ego.position, ego.heading});
    std::vector<AgentState> active;
    for (std::size_t k = 0; k < scenario.agents.size(); ++k) {
      if (!scenario.agents[k].active(now)) continue;
      const Pose p = scenario.agents[k].pose_at(now);
      active.push_back({static_cast<int>(k), p.position, p.heading});
    }
    record.agents.push_back(std::move(active));

    // Ground-truth contact: footprint overlap with any agent. An event is
    // logged when contact with that agent begins.
    const PixelMask ego_mask = mask_for_pose(g, ego, scenario.ego.shape);
    for (std::size_t k = 0; k < scenario.agents.size(); ++k) {
      bool contact = false;
      if (scenario.agents[k].active(now)) {
        const PixelMask agent_mask = mask_for_pose(
            g, scenario.agents[k].pose_at(now), scenario.agents[k].shape);
        contact = ego_mask.overlaps(agent_mask);
      }
      if (contact && !in_contact[k]) {
        record.collisions.push_back({frame, static_cast<int>(k)});
      }
      in_contact[k] = contact ? 1 : 0;
    }

    if ((ego.position - scenario.ego.goal).norm() <=
        scenario.ego.goal_tolerance) {
      record.outcome = Outcome::kGoalReached;
      return record;
    }
    if (frame == scenario.max_frames) break;

    if (frame % scenario.replan_period == 0) {
      const auto points = plan_from(scenario, static_obstacles, background,
                                    ego, frame, &cache);
      if (points) {
        record.plans.push_back({frame, *points});
        if (points->size() >= 2) {
          plan.emplace(*points);
          plan_start_seconds = now;
        }
      } else if (frame == 0) {
        record.outcome = Outcome::kNeverStarted;
        return record;
      }
    }

    if (plan) {
      const double tau = g.frame_to_seconds(frame + 1) - plan_start_seconds;
      const Vec2 position = plan->position(tau);
      const Vec2 velocity = plan->velocity(tau);
      double heading = ego.heading;
      if (velocity.norm() > 1e-9) heading = std::atan2(velocity.y, velocity.x);
      ego = {position, wrap_to_pi(heading), frame + 1};
    }
  }
  record.outcome = Outcome::kTimeout;
  return record;
}

Metrics compute_metrics(const RunRecord& record) {
  Metrics m;
  m.success = record.outcome == Outcome::kGoalReached;
  m.collisions = static_cast<int>(record.collisions.size());

  const std::size_t n = record.ego.size();
  std::size_t distance_end = n == 0 ? 0 : n - 1;
  if (!record.collisions.empty()) {
    distance_end = std::min<std::size_t>(distance_end,
                                         record.collisions.front().frame);
  }
  for (std::size_t k = 1; k <= distance_end; ++k) {
    m.travel_distance +=
        (record.ego[k].position - record.ego[k - 1].position).norm();
  }
  if (m.success && n > 0) m.timesteps = static_cast<int>(n - 1);

  if (n < 3) return m;

  const double period = record.frame_period;
  double effort = 0.0;
  int reversals = 0;
  int sign_longitudinal = 0;
  int sign_lateral = 0;
  Vec2 direction{0.0, 0.0};
  bool have_direction = false;
  constexpr double kEps = 1e-9;

  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 prev = record.ego[k - 1].position;
    const Vec2 here = record.ego[k].position;
    const Vec2 next = record.ego[k + 1].position;
    const Vec2 accel{(next.x - 2.0 * here.x + prev.x) / (period * period),
                     (next.y - 2.0 * here.y + prev.y) / (period * period)};
    effort += accel.norm();

    const Vec2 velocity{(next.x - prev.x) / (2.0 * period),
                        (next.y - prev.y) / (2.0 * period)};
    if (velocity.norm() > kEps) {
      direction = (1.0 / velocity.norm()) * velocity;
      have_direction = true;
    }
    if (!have_direction) continue;

    const double longitudinal = dot(accel, direction);
    const double lateral = -accel.x * direction.y + accel.y * direction.x;
    const int sl = longitudinal > kEps ? 1 : (longitudinal < -kEps ? -1 : 0);
    const int st = lateral > kEps ? 1 : (lateral < -kEps ? -1 : 0);
    if (sl != 0) {
      if (sign_longitudinal != 0 && sl != sign_longitudinal) ++reversals;
      sign_longitudinal = sl;
    }
    if (st != 0) {
      if (sign_lateral != 0 && st != sign_lateral) ++reversals;
      sign_lateral = st;
    }
  }
  m.control_effort = effort;
  m.sudden_reversals = reversals;
  return m;
}

namespace {

Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / (values.size() - 1));
  }
  return a;
}

}  // namespace

BatchSummary aggregate_metrics(std::span<const Metrics> metrics) {
  BatchSummary summary;
  summary.episodes = static_cast<int>(metrics.size());
  if (metrics.empty()) return summary;

  int successes = 0;
  std::vector<double> collisions, timesteps, effort, reversals, distance;
  for (const Metrics& m : metrics) {
    distance.push_back(m.travel_distance);
    if (!m.success) continue;
    ++successes;
    collisions.push_back(m.collisions);
    if (m.timesteps) timesteps.push_back(*m.timesteps);
    if (m.control_effort) effort.push_back(*m.control_effort);
    if (m.sudden_reversals) reversals.push_back(*m.sudden_reversals);
  }
  summary.success_rate = 100.0 * successes / metrics.size();
  summary.collisions = aggregate_of(collisions);
  summary.timesteps = aggregate_of(timesteps);
  summary.control_effort = aggregate_of(effort);
  summary.sudden_reversals = aggregate_of(reversals);
  summary.travel_distance = aggregate_of(distance);
  return summary;
}

std::string format_batch_table(const BatchSummary& summary) {
  char line[160];
  std::ostringstream out;
  std::snprintf(line, sizeof(line), "%-34s %s\n", "Metric",
                "mean +/- std");
  out << line;
  std::snprintf(line, sizeof(line), "%-34s %.1f\n", "Success Rate (%)",
                summary.success_rate);
  out << line;
  auto row = [&](const char* name, const Aggregate& a) {
    if (a.count == 0) {
      std::snprintf(line, sizeof(line), "%-34s n/a\n", name);
    } else {
      std::snprintf(line, sizeof(line), "%-34s %.2f +/- %.2f\n", name, a.mean,
                    a.stddev);
    }
    out << line;
  };
  row("Number of Collisions", summary.collisions);
  row("Total Timesteps to Reach Goal", summary.timesteps);
  row("Total Control Effort", summary.control_effort);
  row("Total Sudden Reversals", summary.sudden_reversals);
  row("Travel Distance (m)", summary.travel_distance);
  std::snprintf(line, sizeof(line), "Episodes: %d\n", summary.episodes);
  out << line;
  return out.str();
}

}  // namespace occuplan

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "occuplan/collision.hpp"
#include "occuplan/record_io.hpp"
#include "occuplan/traffic_sim.hpp"
#include "oracles.hpp"

using namespace occuplan;

namespace {

const std::filesystem::path kScenarioDir = OCCUPLAN_SCENARIO_DIR;

Scenario crossing() { return load_scenario(kScenarioDir / "crossing_car.json"); }
Scenario empty_map() { return load_scenario(kScenarioDir / "empty_map.json"); }

}  // namespace

TEST_CASE("frames before any agent start equal the empty render") {
  Scenario sc = crossing();
  for (Agent& a : sc.agents) a.start_time = 5.0;
  sc.traffic.reset();
  const Frame empty = [&] {
    Scenario bare = sc;
    bare.agents.clear();
    return render_world(bare, 0);
  }();
  const Frame before = render_world(sc, 10);  // t = 1.0 s < 5.0 s
  CHECK(before == empty);
}

TEST_CASE("a rendered agent differs from the background exactly on its mask") {
  Scenario sc = crossing();
  sc.agents.resize(1);
  sc.traffic.reset();
  const int frame = 20;
  const double t = sc.geometry.frame_to_seconds(frame);
  const Frame img = render_world(sc, frame);
  Scenario bare = sc;
  bare.agents.clear();
  const Frame empty = render_world(bare, frame);
  const PixelMask mask = mask_for_pose(sc.geometry,
                                       sc.agents[0].pose_at(t),
                                       sc.agents[0].shape);
  for (int i = 0; i < sc.geometry.height(); ++i) {
    for (int j = 0; j < sc.geometry.width(); ++j) {
      if (mask.at(i, j)) {
        CHECK(img.at(i, j) == sc.agents[0].color);
      } else {
        CHECK(img.at(i, j) == empty.at(i, j));
      }
    }
  }
}

TEST_CASE("rendering is deterministic") {
  const Scenario sc = crossing();
  const Frame a = render_frame(sc, 33, true);
  const Frame b = render_frame(sc, 33, true);
  CHECK(a == b);
}

TEST_CASE("the oracle predictor returns ground-truth future renders") {
  const Scenario sc = crossing();
  const auto frames = oracle_predict(sc, 7, 12);
  REQUIRE(frames.size() == 13);
  for (int t = 0; t <= 12; ++t) {
    CHECK(frames[t] == render_world(sc, 7 + t));
  }
}

TEST_CASE("a static scene predicts identical frames") {
  Scenario sc = empty_map();
  const auto frames = oracle_predict(sc, 0, 8);
  for (const Frame& f : frames) CHECK(f == frames[0]);
}

TEST_CASE("a constant-velocity agent translates one pixel per frame") {
  Scenario sc = crossing();
  sc.agents.resize(1);  // 10 m/s at 1 m pixels and 0.1 s frames
  const auto frames = oracle_predict(sc, 0, 30);
  const GridGeometry& g = sc.geometry;
  for (int t = 0; t + 10 < 30; ++t) {
    // compare the agent pixels of frame t shifted by one column against
    // frame t+1
    for (int i = 16; i <= 19; ++i) {
      for (int j = 0; j + 1 < g.width(); ++j) {
        if (frames[t].at(i, j) == sc.agents[0].color && j >= 22) {
          CHECK(frames[t + 1].at(i, j + 1) == sc.agents[0].color);
        }
      }
    }
  }
}

TEST_CASE("worked example: fields from the oracle match the car timing") {
  Scenario sc = crossing();
  sc.traffic.reset();
  const Frame background = scenario_background(sc);
  const FieldResult fields = compute_fields(sc, background, 0, 40);
  // car front first covers (row 17, col 40) in frame 20 and clears it in
  // frame 25; the next pixel down the lane runs one frame later
  CHECK(fields.occupancy.at(17, 40) == 20);
  CHECK(fields.departure.at(17, 40) == 25);
  CHECK(fields.occupancy.at(17, 41) == 21);
  CHECK(fields.departure.at(17, 41) == 26);
}

TEST_CASE("empty map: the ego reaches the goal on schedule") {
  const Scenario sc = empty_map();
  const RunRecord record = run_episode(sc);
  CHECK(record.outcome == Outcome::kGoalReached);
  CHECK(record.collisions.empty());
  const double distance = (sc.ego.goal - sc.ego.start.position).norm();
  const int expected =
      int(std::ceil(distance / sc.ego.speed / sc.geometry.frame_period()));
  const int frames = int(record.ego.size()) - 1;
  CHECK(std::abs(frames - expected) <= 2);
}

TEST_CASE("crossing map: window-aware planning crosses without contact") {
  const Scenario sc = crossing();
  const RunRecord record = run_episode(sc);
  CHECK(record.outcome == Outcome::kGoalReached);
  CHECK(record.collisions.empty());
}

TEST_CASE("crossing map: an obstacle-blind ego gets hit") {
  Scenario sc = crossing();
  sc.ego.mode = PlannerMode::kClassical;
  const RunRecord record = run_episode(sc);
  CHECK(record.collisions.size() >= 1);
}

TEST_CASE("walled goal: the first plan is infeasible") {
  const Scenario sc = load_scenario(kScenarioDir / "walled_goal.json");
  const RunRecord record = run_episode(sc);
  CHECK(record.outcome == Outcome::kNeverStarted);
}

TEST_CASE("episodes are deterministic byte for byte") {
  const Scenario sc = crossing();
  const RunRecord a = run_episode(sc);
  const RunRecord b = run_episode(sc);
  CHECK(record_to_json(a) == record_to_json(b));
}

TEST_CASE("records round-trip through JSON") {
  Scenario sc = empty_map();
  sc.max_frames = 60;
  sc.ego.goal_tolerance = 50.0;  // end quickly
  RunRecord record = run_episode(sc);
  record.seed = 77;
  const std::string text = record_to_json(record);
  const RunRecord parsed = record_from_json(text);
  CHECK(record_to_json(parsed) == text);
}

TEST_CASE("recorded agent counts match the active agents") {
  const Scenario sc = crossing();
  const RunRecord record = run_episode(sc);
  for (std::size_t f = 0; f < record.agents.size(); ++f) {
    const double t = sc.geometry.frame_to_seconds(int(f));
    std::size_t active = 0;
    for (const Agent& a : sc.agents) {
      if (a.active(t)) ++active;
    }
    CHECK(record.agents[f].size() == active);
  }
}

TEST_CASE("ground-truth contacts are visible to the window check") {
  // oracle soundness: when the blind ego hits a car, the fields computed
  // over a horizon covering that frame flag the same footprint
  Scenario sc = crossing();
  sc.ego.mode = PlannerMode::kClassical;
  const RunRecord record = run_episode(sc);
  REQUIRE(!record.collisions.empty());
  const Frame background = scenario_background(sc);
  const CollisionEvent hit = record.collisions.front();
  const int from = std::max(0, hit.frame - 10);
  const FieldResult fields =
      compute_fields(sc, background, from, hit.frame - from + 5);
  const TimedPose& pose = record.ego[hit.frame];
  const PixelMask mask = mask_for_pose(
      sc.geometry, {pose.position, pose.heading, hit.frame}, sc.ego.shape);
  CHECK(check_t2nod(mask, hit.frame - from, fields.occupancy,
                    fields.departure));
}

TEST_CASE("unobserved canvas pixels can be planned around as obstacles") {
  // two views leave the middle third of a corridor unobserved; the
  // pessimistic policy must detour through the observed strip while the
  // default policy drives straight through
  const std::string text = R"({
    "schema_version": 1,
    "name": "blindspot",
    "geometry": {"height": 12, "width": 30, "origin": [0.0, 0.0],
                 "resolution": 1.0, "frame_period": 0.1},
    "roads": [{"x": [-1.0, 30.0], "y": [-1.0, 12.0]}],
    "ego": {"shape": [2.0, 1.0],
            "start": {"position": [2.0, 2.0], "heading": 0.0},
            "goal": [27.0, 2.0], "speed": 2.0,
            "planner": {"connectivity": 8}},
    "horizon": 20,
    "replan_period": 40,
    "background_window": 10,
    "max_frames": 400,
    "multi_view": {
      "views": [
        {"height": 12, "width": 10, "origin": [0.0, 0.0]},
        {"height": 3, "width": 10, "origin": [10.0, 9.0]},
        {"height": 12, "width": 10, "origin": [20.0, 0.0]}
      ],
      "unobserved": "occupied"
    }
  })";
  const Scenario pessimistic = parse_scenario(text);
  const RunRecord detour = run_episode(pessimistic);
  CHECK(detour.outcome == Outcome::kGoalReached);
  // the unobserved block (rows 0..8, cols 10..19) must never be entered
  for (const TimedPose& p : detour.ego) {
    const bool inside_blindspot = p.position.x > 10.6 && p.position.x < 18.4 &&
                                  p.position.y < 8.4;
    CHECK_FALSE(inside_blindspot);
  }

  Scenario open = pessimistic;
  open.multi_view->unobserved_occupied = false;
  const RunRecord straight = run_episode(open);
  CHECK(straight.outcome == Outcome::kGoalReached);
  CHECK(straight.ego.size() < detour.ego.size());
}

TEST_CASE("metrics of a stationary record are all zero") {
  RunRecord record;
  record.frame_period = 0.1;
  record.outcome = Outcome::kTimeout;
  for (int k = 0; k < 20; ++k) {
    record.ego.push_back({0.1 * k, {3.0, 4.0}, 0.0});
  }
  const Metrics m = compute_metrics(record);
  CHECK_FALSE(m.success);
  CHECK(m.collisions == 0);
  CHECK(m.travel_distance == 0.0);
  CHECK_FALSE(m.timesteps.has_value());
  REQUIRE(m.control_effort.has_value());
  CHECK(*m.control_effort == 0.0);
  CHECK(*m.sudden_reversals == 0);
}

TEST_CASE("metrics of a constant-velocity run have no effort") {
  RunRecord record;
  record.frame_period = 0.1;
  record.outcome = Outcome::kGoalReached;
  for (int k = 0; k <= 100; ++k) {
    record.ego.push_back({0.1 * k, {0.2 * k, 1.0}, 0.0});
  }
  const Metrics m = compute_metrics(record);
  CHECK(m.success);
  CHECK(m.travel_distance == doctest::Approx(20.0).epsilon(1e-9));
  REQUIRE(m.timesteps.has_value());
  CHECK(*m.timesteps == 100);
  REQUIRE(m.control_effort.has_value());
  CHECK(*m.control_effort < 1e-6);
  CHECK(*m.sudden_reversals == 0);
}

TEST_CASE("metrics of a triangle-wave velocity count its reversals") {
  // speed alternates between 1 and 2 m/s every 10 frames along +x; the
  // longitudinal acceleration is a square wave whose sign changes at each
  // vertex of the triangle profile
  RunRecord record;
  record.frame_period = 0.1;
  record.outcome = Outcome::kGoalReached;
  double x = 0.0;
  std::vector<double> xs{x};
  for (int segment = 0; segment < 6; ++segment) {
    for (int k = 0; k < 10; ++k) {
      const double v = segment % 2 == 0
                           ? 1.0 + 0.1 * k   // accelerating leg
                           : 2.0 - 0.1 * k;  // decelerating leg
      x += v * 0.1;
      xs.push_back(x);
    }
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    record.ego.push_back({0.1 * k, {xs[k], 0.0}, 0.0});
  }
  const Metrics m = compute_metrics(record);

  // analytic oracle: sign changes of the second difference of x
  int expected = 0;
  int last_sign = 0;
  double expected_effort = 0.0;
  for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
    const double second = xs[k + 1] - 2.0 * xs[k] + xs[k - 1];
    expected_effort += std::abs(second) / (0.1 * 0.1);
    const int sign = second > 1e-12 ? 1 : (second < -1e-12 ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++expected;
      last_sign = sign;
    }
  }
  REQUIRE(m.sudden_reversals.has_value());
  CHECK(*m.sudden_reversals == expected);
  REQUIRE(m.control_effort.has_value());
  CHECK(*m.control_effort == doctest::Approx(expected_effort).epsilon(1e-9));
}

TEST_CASE("short records leave effort and reversals unset") {
  RunRecord record;
  record.frame_period = 0.1;
  record.ego.push_back({0.0, {0, 0}, 0});
  record.ego.push_back({0.1, {1, 0}, 0});
  const Metrics m = compute_metrics(record);
  CHECK_FALSE(m.control_effort.has_value());
  CHECK_FALSE(m.sudden_reversals.has_value());
}

TEST_CASE("travel distance stops at the first collision") {
  RunRecord record;
  record.frame_period = 0.1;
  record.outcome = Outcome::kGoalReached;
  for (int k = 0; k <= 10; ++k) {
    record.ego.push_back({0.1 * k, {double(k), 0.0}, 0.0});
  }
  record.collisions.push_back({4, 0});
  const Metrics m = compute_metrics(record);
  CHECK(m.travel_distance == doctest::Approx(4.0));
  CHECK(m.collisions == 1);
}

TEST_CASE("aggregation over one episode is its metrics with zero std") {
  Metrics m;
  m.success = true;
  m.collisions = 2;
  m.travel_distance = 31.5;
  m.timesteps = 210;
  m.control_effort = 12.25;
  m.sudden_reversals = 4;
  const BatchSummary s = aggregate_metrics(std::vector{m});
  CHECK(s.episodes == 1);
  CHECK(s.success_rate == 100.0);
  CHECK(s.collisions.mean == 2.0);
  CHECK(s.collisions.stddev == 0.0);
  CHECK(s.travel_distance.mean == doctest::Approx(31.5));
  CHECK(s.timesteps.mean == 210.0);
}

TEST_CASE("aggregation follows the successful-trials rule") {
  Metrics ok;
  ok.success = true;
  ok.collisions = 1;
  ok.travel_distance = 30.0;
  ok.timesteps = 100;
  ok.control_effort = 5.0;
  ok.sudden_reversals = 2;
  Metrics failed;
  failed.success = false;
  failed.collisions = 9;
  failed.travel_distance = 10.0;
  failed.control_effort = 99.0;
  failed.sudden_reversals = 9;
  const BatchSummary s = aggregate_metrics(std::vector{ok, failed});
  CHECK(s.success_rate == 50.0);
  CHECK(s.collisions.count == 1);  // failures excluded
  CHECK(s.collisions.mean == 1.0);
  CHECK(s.travel_distance.count == 2);  // distance counts every episode
  CHECK(s.travel_distance.mean == doctest::Approx(20.0));
  const std::string table = format_batch_table(s);
  CHECK(table.find("Success Rate") != std::string::npos);
  CHECK(table.find("50.0") != std::string::npos);
}

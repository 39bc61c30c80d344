#include "occuplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace occuplan {

using nlohmann::json;

double Agent::duration() const {
  if (route.size() < 2) return 0.0;
  if (speed <= 0.0) return std::numeric_limits<double>::infinity();
  double length = 0.0;
  for (std::size_t k = 1; k < route.size(); ++k) {
    length += (route[k] - route[k - 1]).norm();
  }
  return length / speed;
}

bool Agent::active(double seconds) const {
  if (seconds < start_time) return false;
  return seconds <= start_time + duration();
}

Pose Agent::pose_at(double seconds) const {
  if (route.size() < 2) {
    return {route.empty() ? Vec2{} : route.front(), 0.0, 0};
  }
  double total = 0.0;
  for (std::size_t k = 1; k < route.size(); ++k) {
    total += (route[k] - route[k - 1]).norm();
  }
  double s = speed > 0.0 ? speed * (seconds - start_time) : 0.0;
  s = std::clamp(s, 0.0, total);

  double heading = 0.0;
  for (std::size_t k = 1; k < route.size(); ++k) {
    const Vec2 d = route[k] - route[k - 1];
    const double len = d.norm();
    if (len <= 0.0) continue;
    heading = std::atan2(d.y, d.x);
    if (s <= len) {
      const double frac = s / len;
      return {{route[k - 1].x + d.x * frac, route[k - 1].y + d.y * frac},
              heading,
              0};
    }
    s -= len;
  }
  return {route.back(), heading, 0};
}

PlannerMode planner_mode_from_string(const std::string& name) {
  if (name == "t2nod") return PlannerMode::kT2nod;
  if (name == "dynamic") return PlannerMode::kDynamic;
  if (name == "classical") return PlannerMode::kClassical;
  if (name == "paper-literal") return PlannerMode::kPaperLiteral;
  throw std::invalid_argument("unknown planner mode: " + name);
}

std::string to_string(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kT2nod:
      return "t2nod";
    case PlannerMode::kDynamic:
      return "dynamic";
    case PlannerMode::kClassical:
      return "classical";
    case PlannerMode::kPaperLiteral:
      return "paper-literal";
  }
  return "t2nod";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Agent> randomize_traffic(const TrafficConfig& config,
                                     std::uint64_t seed) {
  if (config.routes.empty()) {
    throw std::invalid_argument("randomize_traffic: no routes configured");
  }
  std::uint64_t state = seed;
  std::vector<Agent> agents;
  agents.reserve(config.count);
  for (int k = 0; k < config.count; ++k) {
    Agent a;
    a.shape = config.shape;
    a.color = config.color;
    a.route = config.routes[splitmix64(state) % config.routes.size()];
    a.speed = config.speed_min +
              (config.speed_max - config.speed_min) * uniform01(state);
    a.start_time = config.start_min +
                   (config.start_max - config.start_min) * uniform01(state);
    agents.push_back(std::move(a));
  }
  return agents;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::invalid_argument("scenario: " + path + ": " + message);
}

void expect_object(const json& node, const std::string& path,
                   std::initializer_list<const char*> allowed,
                   std::initializer_list<const char*> required) {
  if (!node.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + key, "unknown field");
  }
  for (const char* r : required) {
    if (!node.contains(r)) fail(path + "." + r, "missing required field");
  }
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

int get_int(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<int>();
}

bool get_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) fail(path, "expected a boolean");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

Vec2 get_vec2(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 2) {
    fail(path, "expected [x, y]");
  }
  return {get_number(node[0], path + "[0]"), get_number(node[1], path + "[1]")};
}

Rgb get_rgb(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 3) fail(path, "expected [r, g, b]");
  Rgb c;
  int v[3];
  for (int k = 0; k < 3; ++k) {
    v[k] = get_int(node[k], path + "[" + std::to_string(k) + "]");
    if (v[k] < 0 || v[k] > 255) fail(path, "channel out of range 0..255");
  }
  c.r = static_cast<std::uint8_t>(v[0]);
  c.g = static_cast<std::uint8_t>(v[1]);
  c.b = static_cast<std::uint8_t>(v[2]);
  return c;
}

VehicleShape get_shape(const json& node, const std::string& path) {
  const Vec2 v = get_vec2(node, path);
  if (!(v.x > 0.0) || !(v.y > 0.0)) fail(path, "shape must be positive");
  return {v.x, v.y};
}

std::vector<Vec2> get_route(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() < 2) {
    fail(path, "expected >= 2 waypoints");
  }
  std::vector<Vec2> route;
  for (std::size_t k = 0; k < node.size(); ++k) {
    route.push_back(get_vec2(node[k], path + "[" + std::to_string(k) + "]"));
  }
  return route;
}

GridGeometry get_geometry(const json& node, const std::string& path,
                          double default_resolution, double default_period) {
  expect_object(node, path,
                {"height", "width", "origin", "resolution", "frame_period"},
                {"height", "width", "origin"});
  const double res = node.contains("resolution")
                         ? get_number(node["resolution"], path + ".resolution")
                         : default_resolution;
  const double period =
      node.contains("frame_period")
          ? get_number(node["frame_period"], path + ".frame_period")
          : default_period;
  return GridGeometry(get_int(node["height"], path + ".height"),
                      get_int(node["width"], path + ".width"),
                      get_vec2(node["origin"], path + ".origin"), res, period);
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must be key.path=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // unquoted strings pass through verbatim
  }

  json* node = &root;
  std::stringstream ss(path);
  std::string segment;
  std::vector<std::string> segments;
  while (std::getline(ss, segment, '.')) {
    if (segment == "K") segment = "collision_penalty";  // accepted shorthand
    segments.push_back(segment);
  }
  if (segments.empty()) {
    throw std::invalid_argument("override has empty key path: " + assignment);
  }
  for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
    if (!node->is_object()) {
      throw std::invalid_argument("override path crosses a non-object: " +
                                  assignment);
    }
    node = &(*node)[segments[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) {
    throw std::invalid_argument("override path crosses a non-object: " + assignment);
  }
  (*node)[segments.back()] = value;
}

PixelMask build_road_mask(const json& roads, const GridGeometry& geometry,
                          const std::string& path) {
  if (!roads.is_array() || roads.empty()) {
    fail(path, "expected a non-empty array of rectangles");
  }
  PixelMask mask(geometry.height(), geometry.width(), false);
  for (std::size_t k = 0; k < roads.size(); ++k) {
    const std::string rect_path = path + "[" + std::to_string(k) + "]";
    const json& rect = roads[k];
    expect_object(rect, rect_path, {"x", "y"}, {"x", "y"});
    const Vec2 xr = get_vec2(rect["x"], rect_path + ".x");
    const Vec2 yr = get_vec2(rect["y"], rect_path + ".y");
    for (int i = 0; i < geometry.height(); ++i) {
      for (int j = 0; j < geometry.width(); ++j) {
        const Vec2 c = geometry.px2sp(i, j);
        if (c.x >= xr.x && c.x <= xr.y && c.y >= yr.x && c.y <= yr.y) {
          mask.set(i, j, true);
        }
      }
    }
  }
  return mask;
}

Agent parse_agent(const json& node, const std::string& path) {
  expect_object(node, path, {"shape", "route", "speed", "color", "start_time"},
                {"shape", "route", "speed"});
  Agent a;
  a.shape = get_shape(node["shape"], path + ".shape");
  a.route = get_route(node["route"], path + ".route");
  a.speed = get_number(node["speed"], path + ".speed");
  if (a.speed < 0.0) fail(path + ".speed", "must be >= 0");
  if (node.contains("color")) a.color = get_rgb(node["color"], path + ".color");
  if (node.contains("start_time")) {
    a.start_time = get_number(node["start_time"], path + ".start_time");
    if (a.start_time < 0.0) fail(path + ".start_time", "must be >= 0");
  }
  return a;
}

PlannerConfig parse_planner(const json& node, const std::string& path,
                            const GridGeometry& geometry, double ego_speed,
                            int horizon) {
  PlannerConfig cfg;
  cfg.speed = ego_speed;
  cfg.collision_penalty = default_collision_penalty(geometry);
  cfg.max_wait_frame = horizon;
  if (node.is_null()) return cfg;
  expect_object(node, path,
                {"connectivity", "collision_penalty", "max_expansions",
                 "allow_wait", "max_wait_frame"},
                {});
  if (node.contains("connectivity")) {
    cfg.connectivity = get_int(node["connectivity"], path + ".connectivity");
    if (cfg.connectivity != 4 && cfg.connectivity != 8) {
      fail(path + ".connectivity", "must be 4 or 8");
    }
  }
  if (node.contains("collision_penalty")) {
    cfg.collision_penalty =
        get_number(node["collision_penalty"], path + ".collision_penalty");
    if (cfg.collision_penalty < 0.0) {
      fail(path + ".collision_penalty", "must be >= 0");
    }
  }
  if (node.contains("max_expansions")) {
    const int v = get_int(node["max_expansions"], path + ".max_expansions");
    if (v < 1) fail(path + ".max_expansions", "must be >= 1");
    cfg.max_expansions = static_cast<std::size_t>(v);
  }
  if (node.contains("allow_wait")) {
    cfg.allow_wait = get_bool(node["allow_wait"], path + ".allow_wait");
  }
  if (node.contains("max_wait_frame")) {
    cfg.max_wait_frame =
        get_int(node["max_wait_frame"], path + ".max_wait_frame");
  }
  return cfg;
}

TrafficConfig parse_traffic(const json& node, const std::string& path) {
  expect_object(node, path,
                {"count", "routes", "speed_range", "start_window", "shape",
                 "color"},
                {"count", "routes"});
  TrafficConfig cfg;
  cfg.count = get_int(node["count"], path + ".count");
  if (cfg.count < 0) fail(path + ".count", "must be >= 0");
  if (!node["routes"].is_array() || node["routes"].empty()) {
    fail(path + ".routes", "expected a non-empty array of routes");
  }
  for (std::size_t k = 0; k < node["routes"].size(); ++k) {
    cfg.routes.push_back(get_route(node["routes"][k],
                                   path + ".routes[" + std::to_string(k) +
                                       "]"));
  }
  if (node.contains("speed_range")) {
    const Vec2 r = get_vec2(node["speed_range"], path + ".speed_range");
    if (!(r.x > 0.0) || r.y < r.x) fail(path + ".speed_range", "bad range");
    cfg.speed_min = r.x;
    cfg.speed_max = r.y;
  }
  if (node.contains("start_window")) {
    const Vec2 r = get_vec2(node["start_window"], path + ".start_window");
    if (r.x < 0.0 || r.y < r.x) fail(path + ".start_window", "bad range");
    cfg.start_min = r.x;
    cfg.start_max = r.y;
  }
  if (node.contains("shape")) {
    cfg.shape = get_shape(node["shape"], path + ".shape");
  }
  if (node.contains("color")) {
    cfg.color = get_rgb(node["color"], path + ".color");
  }
  return cfg;
}

MultiViewConfig parse_multi_view(const json& node, const std::string& path,
                                 const GridGeometry& canvas) {
  expect_object(node, path, {"views", "unobserved"}, {"views"});
  MultiViewConfig cfg;
  if (!node["views"].is_array() || node["views"].empty()) {
    fail(path + ".views", "expected a non-empty array");
  }
  for (std::size_t k = 0; k < node["views"].size(); ++k) {
    cfg.views.push_back(get_geometry(
        node["views"][k], path + ".views[" + std::to_string(k) + "]",
        canvas.resolution(), canvas.frame_period()));
  }
  if (node.contains("unobserved")) {
    const std::string policy =
        get_string(node["unobserved"], path + ".unobserved");
    if (policy == "occupied") {
      cfg.unobserved_occupied = true;
    } else if (policy != "free") {
      fail(path + ".unobserved", "expected \"free\" or \"occupied\"");
    }
  }
  // A layout is constructible exactly when views align with the canvas.
  make_layout(canvas, cfg.views);
  return cfg;
}

}  // namespace

Scenario parse_scenario(const std::string& text,
                        std::span<const std::string> overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: JSON parse error: ") +
                                e.what());
  }
  for (const std::string& o : overrides) apply_override(root, o);

  expect_object(root, "$",
                {"schema_version", "name", "geometry", "colors", "roads",
                 "agents", "ego", "horizon", "replan_period",
                 "background_window", "thresholds", "list_capacity",
                 "field_horizons", "max_frames", "traffic", "multi_view"},
                {"schema_version", "name", "geometry", "roads", "ego",
                 "horizon", "max_frames"});
  if (get_int(root["schema_version"], "$.schema_version") != 1) {
    fail("$.schema_version", "unsupported schema version");
  }

  Scenario sc;
  sc.name = get_string(root["name"], "$.name");
  sc.geometry = get_geometry(root["geometry"], "$.geometry", 1.0, 0.1);
  if (!root["geometry"].contains("resolution") ||
      !root["geometry"].contains("frame_period")) {
    fail("$.geometry", "resolution and frame_period are required");
  }
  sc.road_mask = build_road_mask(root["roads"], sc.geometry, "$.roads");

  if (root.contains("colors")) {
    expect_object(root["colors"], "$.colors", {"road", "offroad", "ego"}, {});
    if (root["colors"].contains("road")) {
      sc.colors.road = get_rgb(root["colors"]["road"], "$.colors.road");
    }
    if (root["colors"].contains("offroad")) {
      sc.colors.offroad =
          get_rgb(root["colors"]["offroad"], "$.colors.offroad");
    }
    if (root["colors"].contains("ego")) {
      sc.colors.ego = get_rgb(root["colors"]["ego"], "$.colors.ego");
    }
  }

  if (root.contains("agents")) {
    if (!root["agents"].is_array()) fail("$.agents", "expected an array");
    for (std::size_t k = 0; k < root["agents"].size(); ++k) {
      sc.agents.push_back(parse_agent(
          root["agents"][k], "$.agents[" + std::to_string(k) + "]"));
    }
  }

  sc.horizon = get_int(root["horizon"], "$.horizon");
  if (sc.horizon < 1) fail("$.horizon", "must be >= 1");
  sc.max_frames = get_int(root["max_frames"], "$.max_frames");
  if (sc.max_frames < 1) fail("$.max_frames", "must be >= 1");

  if (root.contains("replan_period")) {
    sc.replan_period = get_int(root["replan_period"], "$.replan_period");
    if (sc.replan_period < 1) fail("$.replan_period", "must be >= 1");
  } else {
    // 20 Hz replanning, clamped to the frame rate.
    sc.replan_period = std::max(
        1, static_cast<int>(
               std::floor(1.0 / (20.0 * sc.geometry.frame_period()) + 0.5)));
  }
  if (root.contains("background_window")) {
    sc.background_window =
        get_int(root["background_window"], "$.background_window");
    if (sc.background_window < 1) fail("$.background_window", "must be >= 1");
  }
  if (root.contains("thresholds")) {
    expect_object(root["thresholds"], "$.thresholds",
                  {"tau_occupancy", "tau_departure"},
                  {"tau_occupancy", "tau_departure"});
    sc.thresholds.tau_occupancy =
        get_int(root["thresholds"]["tau_occupancy"],
                "$.thresholds.tau_occupancy");
    sc.thresholds.tau_departure =
        get_int(root["thresholds"]["tau_departure"],
                "$.thresholds.tau_departure");
  }
  try {
    sc.thresholds.validate();
  } catch (const std::invalid_argument& e) {
    fail("$.thresholds", e.what());
  }
  if (root.contains("list_capacity")) {
    sc.list_capacity = get_int(root["list_capacity"], "$.list_capacity");
    if (sc.list_capacity < 2 || sc.list_capacity % 2 != 0) {
      fail("$.list_capacity", "must be even and >= 2");
    }
  }
  if (root.contains("field_horizons")) {
    if (!root["field_horizons"].is_array() || root["field_horizons"].empty()) {
      fail("$.field_horizons", "expected a non-empty array");
    }
    sc.field_horizons.clear();
    for (std::size_t k = 0; k < root["field_horizons"].size(); ++k) {
      const int h = get_int(root["field_horizons"][k],
                            "$.field_horizons[" + std::to_string(k) + "]");
      if (h < 1) fail("$.field_horizons", "horizons must be >= 1");
      sc.field_horizons.push_back(h);
    }
  }

  const json& ego = root["ego"];
  expect_object(ego, "$.ego",
                {"shape", "start", "goal", "speed", "goal_tolerance",
                 "check_padding", "planner", "mode"},
                {"shape", "start", "goal", "speed"});
  sc.ego.shape = get_shape(ego["shape"], "$.ego.shape");
  expect_object(ego["start"], "$.ego.start", {"position", "heading"},
                {"position", "heading"});
  sc.ego.start.position =
      get_vec2(ego["start"]["position"], "$.ego.start.position");
  sc.ego.start.heading =
      wrap_to_pi(get_number(ego["start"]["heading"], "$.ego.start.heading"));
  sc.ego.start.time = 0;
  sc.ego.goal = get_vec2(ego["goal"], "$.ego.goal");
  sc.ego.speed = get_number(ego["speed"], "$.ego.speed");
  if (!(sc.ego.speed > 0.0)) fail("$.ego.speed", "must be > 0");
  if (ego.contains("goal_tolerance")) {
    sc.ego.goal_tolerance =
        get_number(ego["goal_tolerance"], "$.ego.goal_tolerance");
    if (!(sc.ego.goal_tolerance > 0.0)) {
      fail("$.ego.goal_tolerance", "must be > 0");
    }
  }
  if (ego.contains("check_padding")) {
    sc.ego.check_padding =
        get_number(ego["check_padding"], "$.ego.check_padding");
    if (sc.ego.check_padding < 0.0) {
      fail("$.ego.check_padding", "must be >= 0");
    }
  }
  sc.ego.planner =
      parse_planner(ego.contains("planner") ? ego["planner"] : json(),
                    "$.ego.planner", sc.geometry, sc.ego.speed, sc.horizon);
  if (ego.contains("mode")) {
    try {
      sc.ego.mode = planner_mode_from_string(get_string(ego["mode"],
                                                        "$.ego.mode"));
    } catch (const std::invalid_argument& e) {
      fail("$.ego.mode", e.what());
    }
  }

  if (root.contains("traffic")) {
    sc.traffic = parse_traffic(root["traffic"], "$.traffic");
  }
  if (root.contains("multi_view")) {
    sc.multi_view =
        parse_multi_view(root["multi_view"], "$.multi_view", sc.geometry);
  }

  // Start and goal must sit on drivable cells.
  try {
    const PixelIndex s = sc.geometry.sp2px(sc.ego.start.position);
    const PixelIndex g = sc.geometry.sp2px(sc.ego.goal);
    if (!sc.road_mask.at(s.row, s.col)) {
      fail("$.ego.start", "not on the drivable area");
    }
    if (!sc.road_mask.at(g.row, g.col)) {
      fail("$.ego.goal", "not on the drivable area");
    }
  } catch (const OutOfGridError&) {
    fail("$.ego", "start or goal outside the grid");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path,
                       std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("scenario: cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), overrides);
}

}  // namespace occuplan

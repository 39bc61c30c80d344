#include "occuplan/planner.hpp"

#include "occuplan/collision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace occuplan {

double default_collision_penalty(const GridGeometry& geometry) {
  const double diag = std::hypot(geometry.height() * geometry.resolution(),
                                 geometry.width() * geometry.resolution());
  return 1.0e6 * diag;
}

double find_parent(const PlanNode& node, const PlanNode& start) {
  constexpr std::size_t kMaxChain = 10'000'000;
  double total = 0.0;
  const PlanNode* current = &node;
  std::size_t steps = 0;
  while (current != &start) {
    if (current->parent == nullptr || ++steps > kMaxChain) {
      throw std::logic_error("find_parent: broken parent chain");
    }
    total += current->edge_time;
    current = current->parent;
  }
  return total;
}

namespace {

struct Step {
  int drow;
  int dcol;
  bool diagonal;
};

// Fixed successor order keeps searches deterministic.
constexpr Step kSteps8[] = {{-1, -1, true}, {-1, 0, false}, {-1, 1, true},
                            {0, -1, false}, {0, 1, false},  {1, -1, true},
                            {1, 0, false},  {1, 1, true}};
constexpr Step kSteps4[] = {{-1, 0, false}, {0, -1, false}, {0, 1, false},
                            {1, 0, false}};

std::span<const Step> steps_for(int connectivity) {
  if (connectivity == 4) return kSteps4;
  if (connectivity == 8) return kSteps8;
  throw std::invalid_argument("PlannerConfig: connectivity must be 4 or 8");
}

// Direction codes 0..7 index kSteps8; 8 is reserved for the start pose.
constexpr int kStartDirection = 8;

int direction_code(int drow, int dcol) {
  for (int k = 0; k < 8; ++k) {
    if (kSteps8[k].drow == drow && kSteps8[k].dcol == dcol) return k;
  }
  return kStartDirection;
}

double heading_of_step(int code, double start_heading) {
  if (code == kStartDirection) return start_heading;
  return std::atan2(double(kSteps8[code].drow), double(kSteps8[code].dcol));
}

struct HeapEntry {
  double f;
  double h;
  std::int64_t cell_index;
  int frame;
  std::uint64_t sequence;
  PlanNode* node;
};

struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    if (a.cell_index != b.cell_index) return a.cell_index > b.cell_index;
    if (a.frame != b.frame) return a.frame > b.frame;
    return a.sequence > b.sequence;
  }
};

using OpenList = std::priority_queue<HeapEntry, std::vector<HeapEntry>,
                                     HeapOrder>;

double euclid_cells(Cell a, Cell b) {
  return std::hypot(double(a.row - b.row), double(a.col - b.col));
}

void validate_endpoints(const PixelMask& obstacles, Cell start, Cell goal,
                        const GridGeometry& geometry) {
  if (obstacles.height() != geometry.height() ||
      obstacles.width() != geometry.width()) {
    throw std::invalid_argument("planner: obstacle grid dimension mismatch");
  }
  auto in = [&](Cell c) {
    return geometry.contains({c.row, c.col});
  };
  if (!in(start) || !in(goal)) {
    throw std::invalid_argument("planner: start or goal outside grid");
  }
  if (obstacles.at(start.row, start.col) || obstacles.at(goal.row, goal.col)) {
    throw std::invalid_argument("planner: start or goal is an obstacle");
  }
}

std::vector<Cell> reconstruct_cells(const PlanNode* node) {
  std::vector<Cell> path;
  for (const PlanNode* cur = node; cur != nullptr; cur = cur->parent) {
    path.push_back(cur->cell);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<SpaceTimePoint> reconstruct_timed(const PlanNode* node,
                                              const GridGeometry& geometry) {
  std::vector<SpaceTimePoint> path;
  for (const PlanNode* cur = node; cur != nullptr; cur = cur->parent) {
    path.push_back({cur->g, geometry.px2sp(cur->cell.row, cur->cell.col)});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

CellPathResult classical_astar(const PixelMask& obstacles, Cell start,
                               Cell goal, const PlannerConfig& config,
                               const GridGeometry& geometry) {
  validate_endpoints(obstacles, start, goal, geometry);
  const auto steps = steps_for(config.connectivity);
  if (!(config.speed > 0.0)) {
    throw std::invalid_argument("PlannerConfig: speed must be > 0");
  }
  const int h_grid = geometry.height();
  const int w_grid = geometry.width();
  const double straight = geometry.resolution() / config.speed;
  const double diagonal = straight * std::sqrt(2.0);
  auto heuristic = [&](Cell c) { return euclid_cells(c, goal) * straight; };
  auto index_of = [&](Cell c) {
    return static_cast<std::int64_t>(c.row) * w_grid + c.col;
  };

  std::deque<PlanNode> arena;
  std::vector<double> best_g(static_cast<std::size_t>(h_grid) * w_grid,
                             std::numeric_limits<double>::infinity());
  OpenList open;
  std::uint64_t sequence = 0;

  arena.push_back({start, 0, 0.0, heuristic(start), 0.0, nullptr});
  best_g[index_of(start)] = 0.0;
  open.push({arena.back().f, heuristic(start), index_of(start), 0, sequence++,
             &arena.back()});

  CellPathResult result;
  while (!open.empty()) {
    const HeapEntry entry = open.top();
    open.pop();
    PlanNode* node = entry.node;
    if (node->g > best_g[index_of(node->cell)]) continue;  // stale
    if (node->cell == goal) {
      result.path = reconstruct_cells(node);
      return result;
    }
    if (++result.expansions >= config.max_expansions) {
      result.budget_exhausted = true;
      return result;
    }
    for (const Step& s : steps) {
      const Cell succ{node->cell.row + s.drow, node->cell.col + s.dcol};
      if (succ.row < 0 || succ.row >= h_grid || succ.col < 0 ||
          succ.col >= w_grid) {
        continue;
      }
      if (obstacles.at(succ.row, succ.col)) continue;
      const double edge = s.diagonal ? diagonal : straight;
      const double g = node->g + edge;
      if (g < best_g[index_of(succ)]) {
        best_g[index_of(succ)] = g;
        const double h = heuristic(succ);
        arena.push_back({succ, 0, g, g + h, edge, node});
        open.push({g + h, h, index_of(succ), 0, sequence++, &arena.back()});
      }
    }
  }
  return result;
}

namespace {

// Per-frame obstacle occupancy bitmaps, built lazily from the trajectory
// sampling functions.
class ObstacleSampler {
 public:
  ObstacleSampler(std::span<const ObstacleTrajectory> obstacles,
                  const GridGeometry& geometry)
      : obstacles_(obstacles), geometry_(geometry) {}

  bool occupied(Cell cell, int frame) {
    const auto it = cache_.find(frame);
    const std::vector<std::uint8_t>& bits =
        it != cache_.end() ? it->second : build(frame);
    return bits[static_cast<std::size_t>(cell.row) * geometry_.width() +
                cell.col] != 0;
  }

  std::vector<Cell> cells_at(int frame) {
    std::vector<Cell> cells;
    const double seconds = geometry_.frame_to_seconds(frame);
    for (const ObstacleTrajectory& o : obstacles_) {
      for (Cell c : o.sample(seconds)) cells.push_back(c);
    }
    return cells;
  }

 private:
  const std::vector<std::uint8_t>& build(int frame) {
    std::vector<std::uint8_t> bits(
        static_cast<std::size_t>(geometry_.height()) * geometry_.width(), 0);
    for (Cell c : cells_at(frame)) {
      if (geometry_.contains({c.row, c.col})) {
        bits[static_cast<std::size_t>(c.row) * geometry_.width() + c.col] = 1;
      }
    }
    return cache_.emplace(frame, std::move(bits)).first->second;
  }

  std::span<const ObstacleTrajectory> obstacles_;
  const GridGeometry& geometry_;
  std::unordered_map<int, std::vector<std::uint8_t>> cache_;
};

std::int64_t state_key(std::int64_t cell_index, int frame) {
  return (cell_index << 24) ^ frame;
}

TimedPathResult dynamic_astar_timed(const PixelMask& static_obstacles,
                                    std::span<const ObstacleTrajectory> obs,
                                    Cell start, Cell goal,
                                    const PlannerConfig& config,
                                    const GridGeometry& geometry) {
  const auto steps = steps_for(config.connectivity);
  const int h_grid = geometry.height();
  const int w_grid = geometry.width();
  const double period = geometry.frame_period();
  const double straight = geometry.resolution() / config.speed;
  const double diagonal = straight * std::sqrt(2.0);
  auto heuristic = [&](Cell c) { return euclid_cells(c, goal) * straight; };
  auto index_of = [&](Cell c) {
    return static_cast<std::int64_t>(c.row) * w_grid + c.col;
  };

  ObstacleSampler sampler(obs, geometry);
  std::deque<PlanNode> arena;
  std::unordered_map<std::int64_t, double> best_g;
  OpenList open;
  std::uint64_t sequence = 0;

  arena.push_back({start, 0, 0.0, heuristic(start), 0.0, nullptr});
  best_g[state_key(index_of(start), 0)] = 0.0;
  open.push({arena.back().f, heuristic(start), index_of(start), 0, sequence++,
             &arena.back()});

  TimedPathResult result;
  while (!open.empty()) {
    const HeapEntry entry = open.top();
    open.pop();
    PlanNode* node = entry.node;
    const auto key = state_key(index_of(node->cell), node->frame);
    if (node->g > best_g.at(key)) continue;
    if (node->cell == goal) {
      result.path = reconstruct_timed(node, geometry);
      return result;
    }
    if (++result.expansions >= config.max_expansions) {
      result.budget_exhausted = true;
      return result;
    }

    auto try_push = [&](Cell succ, double edge) {
      const double g = node->g + edge;
      const int frame = geometry.seconds_to_frame(g);
      if (sampler.occupied(succ, frame)) return;
      const auto succ_key = state_key(index_of(succ), frame);
      const auto it = best_g.find(succ_key);
      if (it != best_g.end() && it->second <= g) return;
      best_g[succ_key] = g;
      const double h = heuristic(succ);
      arena.push_back({succ, frame, g, g + h, edge, node});
      open.push({g + h, h, index_of(succ), frame, sequence++, &arena.back()});
    };

    for (const Step& s : steps) {
      const Cell succ{node->cell.row + s.drow, node->cell.col + s.dcol};
      if (succ.row < 0 || succ.row >= h_grid || succ.col < 0 ||
          succ.col >= w_grid) {
        continue;
      }
      if (static_obstacles.at(succ.row, succ.col)) continue;
      try_push(succ, s.diagonal ? diagonal : straight);
    }
    if (config.allow_wait &&
        (config.max_wait_frame < 0 || node->frame < config.max_wait_frame)) {
      try_push(node->cell, period);
    }
  }
  return result;
}

TimedPathResult dynamic_astar_cells(const PixelMask& static_obstacles,
                                    std::span<const ObstacleTrajectory> obs,
                                    Cell start, Cell goal,
                                    const PlannerConfig& config,
                                    const GridGeometry& geometry) {
  const auto steps = steps_for(config.connectivity);
  const int h_grid = geometry.height();
  const int w_grid = geometry.width();
  const double straight = geometry.resolution() / config.speed;
  const double diagonal = straight * std::sqrt(2.0);
  auto heuristic = [&](Cell c) { return euclid_cells(c, goal) * straight; };
  auto index_of = [&](Cell c) {
    return static_cast<std::int64_t>(c.row) * w_grid + c.col;
  };

  ObstacleSampler sampler(obs, geometry);
  std::deque<PlanNode> arena;
  const std::size_t cells = static_cast<std::size_t>(h_grid) * w_grid;
  std::vector<double> best_g(cells, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> closed(cells, 0);
  OpenList open;
  std::uint64_t sequence = 0;

  arena.push_back({start, 0, 0.0, heuristic(start), 0.0, nullptr});
  best_g[index_of(start)] = 0.0;
  open.push({arena.back().f, heuristic(start), index_of(start), 0, sequence++,
             &arena.back()});

  TimedPathResult result;
  PlanNode& start_node = arena.front();
  while (!open.empty()) {
    const HeapEntry entry = open.top();
    open.pop();
    PlanNode* node = entry.node;
    if (node->g > best_g[index_of(node->cell)]) continue;
    if (closed[index_of(node->cell)]) continue;
    closed[index_of(node->cell)] = 1;
    if (node->cell == goal) {
      result.path = reconstruct_timed(node, geometry);
      return result;
    }
    if (++result.expansions >= config.max_expansions) {
      result.budget_exhausted = true;
      return result;
    }

    // Close the cells the obstacles occupy at this node's accumulated
    // travel time, for the duration of this expansion only.
    const double elapsed = find_parent(*node, start_node);
    const int frame = geometry.seconds_to_frame(elapsed);
    std::vector<std::int64_t> temporarily_closed;
    for (Cell c : sampler.cells_at(frame)) {
      if (!geometry.contains({c.row, c.col})) continue;
      const auto idx = index_of(c);
      if (!closed[idx]) {
        closed[idx] = 1;
        temporarily_closed.push_back(idx);
      }
    }

    for (const Step& s : steps) {
      const Cell succ{node->cell.row + s.drow, node->cell.col + s.dcol};
      if (succ.row < 0 || succ.row >= h_grid || succ.col < 0 ||
          succ.col >= w_grid) {
        continue;
      }
      if (static_obstacles.at(succ.row, succ.col)) continue;
      if (closed[index_of(succ)]) continue;
      const double edge = s.diagonal ? diagonal : straight;
      const double g = node->g + edge;
      if (g < best_g[index_of(succ)]) {
        best_g[index_of(succ)] = g;
        const double h = heuristic(succ);
        arena.push_back({succ, 0, g, g + h, edge, node});
        open.push({g + h, h, index_of(succ), 0, sequence++, &arena.back()});
      }
    }

    for (std::int64_t idx : temporarily_closed) closed[idx] = 0;
  }
  return result;
}

}  // namespace

TimedPathResult dynamic_astar(const PixelMask& static_obstacles,
                              std::span<const ObstacleTrajectory> obstacles,
                              Cell start, Cell goal,
                              const PlannerConfig& config,
                              const GridGeometry& geometry,
                              bool paper_literal) {
  validate_endpoints(static_obstacles, start, goal, geometry);
  if (!(config.speed > 0.0)) {
    throw std::invalid_argument("PlannerConfig: speed must be > 0");
  }
  if (paper_literal) {
    return dynamic_astar_cells(static_obstacles, obstacles, start, goal,
                               config, geometry);
  }
  return dynamic_astar_timed(static_obstacles, obstacles, start, goal, config,
                             geometry);
}

TimedPathResult t2nod_astar(const TimeField& occupancy,
                            const TimeField& departure,
                            const PixelMask& static_obstacles, Cell start,
                            Cell goal, const PlannerConfig& config,
                            const VehicleShape& shape,
                            const GridGeometry& geometry,
                            double start_heading) {
  validate_endpoints(static_obstacles, start, goal, geometry);
  if (occupancy.height() != geometry.height() ||
      occupancy.width() != geometry.width() ||
      departure.height() != geometry.height() ||
      departure.width() != geometry.width()) {
    throw std::invalid_argument("t2nod_astar: field dimension mismatch");
  }
  if (!(config.speed > 0.0)) {
    throw std::invalid_argument("PlannerConfig: speed must be > 0");
  }
  const auto steps = steps_for(config.connectivity);
  const int h_grid = geometry.height();
  const int w_grid = geometry.width();
  const double period = geometry.frame_period();
  const double straight = geometry.resolution() / config.speed;
  const double diagonal = straight * std::sqrt(2.0);
  const double penalty = config.collision_penalty;
  auto heuristic = [&](Cell c) { return euclid_cells(c, goal) * straight; };
  auto index_of = [&](Cell c) {
    return static_cast<std::int64_t>(c.row) * w_grid + c.col;
  };

  // Footprint pixels per (cell, incoming direction), computed on demand.
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> footprints;
  auto footprint = [&](Cell cell,
                       int direction) -> const std::vector<std::int64_t>& {
    const std::int64_t key = index_of(cell) * 16 + direction;
    const auto it = footprints.find(key);
    if (it != footprints.end()) return it->second;
    const Pose pose{geometry.px2sp(cell.row, cell.col),
                    heading_of_step(direction, start_heading), 0};
    const PixelMask mask = mask_for_pose(geometry, pose, shape);
    std::vector<std::int64_t> pixels;
    for (int i = 0; i < h_grid; ++i) {
      for (int j = 0; j < w_grid; ++j) {
        if (mask.at(i, j)) {
          pixels.push_back(static_cast<std::int64_t>(i) * w_grid + j);
        }
      }
    }
    return footprints.emplace(key, std::move(pixels)).first->second;
  };
  // A successor is tested over every frame of its incoming edge, not just
  // its own: tracking at uniform speed crosses the cell during the edge,
  // and an edge can span several frames. For one-frame edges this is the
  // plain single-frame check.
  auto in_window = [&](Cell cell, int direction, int frame0, int frame1) {
    const auto o = occupancy.values();
    const auto d = departure.values();
    for (std::int64_t p : footprint(cell, direction)) {
      if (window_overlaps(o[p], d[p], frame0, frame1)) return true;
    }
    return false;
  };

  std::deque<PlanNode> arena;
  std::unordered_map<std::int64_t, double> best_g;
  OpenList open;
  std::uint64_t sequence = 0;

  {
    const bool chk = in_window(start, kStartDirection, 0, 0);
    const double h = heuristic(start);
    arena.push_back({start, 0, 0.0, h + (chk ? penalty : 0.0), 0.0, nullptr,
                     kStartDirection, chk});
    best_g[state_key(index_of(start), 0)] = 0.0;
    open.push({arena.back().f, h, index_of(start), 0, sequence++,
               &arena.back()});
  }

  TimedPathResult result;
  while (!open.empty()) {
    const HeapEntry entry = open.top();
    open.pop();
    PlanNode* node = entry.node;
    const auto key = state_key(index_of(node->cell), node->frame);
    if (node->g > best_g.at(key)) continue;
    if (node->cell == goal) {
      bool clean = true;
      for (const PlanNode* cur = node; cur != nullptr; cur = cur->parent) {
        if (cur->in_collision) {
          clean = false;
          break;
        }
      }
      // With the penalty disabled the search is deliberately blind to the
      // occupancy windows and returns whatever it reached first.
      if (clean || penalty <= 0.0) {
        result.path = reconstruct_timed(node, geometry);
        return result;
      }
      continue;  // only penalized routes reach this goal state; keep looking
    }
    if (++result.expansions >= config.max_expansions) {
      result.budget_exhausted = true;
      return result;
    }

    auto try_push = [&](Cell succ, double edge, int direction) {
      const double g = node->g + edge;
      const int frame = geometry.seconds_to_frame(g);
      const auto succ_key = state_key(index_of(succ), frame);
      const auto it = best_g.find(succ_key);
      if (it != best_g.end() && it->second <= g) return;
      best_g[succ_key] = g;
      const int entry_frame = std::min(node->frame + 1, frame);
      // Arrival cell over the edge frames, and the departing cell over the
      // same frames short of the last: the body straddles both while the
      // edge is traversed. One-frame edges reduce to the arrival check.
      bool chk = in_window(succ, direction, entry_frame, frame);
      if (!chk && frame - 1 >= entry_frame) {
        chk = in_window(node->cell, node->direction, entry_frame, frame - 1);
      }
      const double h = heuristic(succ);
      arena.push_back(
          {succ, frame, g, g + h + (chk ? penalty : 0.0), edge, node,
           direction, chk});
      open.push({arena.back().f, h, index_of(succ), frame, sequence++,
                 &arena.back()});
    };

    for (std::size_t si = 0; si < steps.size(); ++si) {
      const Step& s = steps[si];
      const Cell succ{node->cell.row + s.drow, node->cell.col + s.dcol};
      if (succ.row < 0 || succ.row >= h_grid || succ.col < 0 ||
          succ.col >= w_grid) {
        continue;
      }
      if (static_obstacles.at(succ.row, succ.col)) continue;
      try_push(succ, s.diagonal ? diagonal : straight,
               direction_code(s.drow, s.dcol));
    }
    if (config.allow_wait &&
        (config.max_wait_frame < 0 || node->frame < config.max_wait_frame)) {
      try_push(node->cell, period, node->direction);
    }
  }
  return result;
}

std::vector<TimedPose> attach_headings(std::span<const SpaceTimePoint> points,
                                       double initial_heading) {
  std::vector<TimedPose> out;
  out.reserve(points.size());
  double heading = initial_heading;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k + 1 < points.size()) {
      const Vec2 d = points[k + 1].position - points[k].position;
      if (d.norm() > 1e-12) heading = std::atan2(d.y, d.x);
    }
    out.push_back({points[k].time, points[k].position, heading});
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_timed_path_csv(std::ostream& out, std::span<const TimedPose> path) {
  out << "t_s,x_m,y_m,heading_rad\n";
  for (const TimedPose& p : path) {
    out << format_double(p.time) << ',' << format_double(p.position.x) << ','
        << format_double(p.position.y) << ',' << format_double(p.heading)
        << '\n';
  }
}

std::vector<TimedPose> read_timed_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t_s,x_m,y_m,heading_rad") {
    throw std::invalid_argument("timed path CSV: bad header");
  }
  std::vector<TimedPose> path;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double vals[4];
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ss, cell, ',')) {
        throw std::invalid_argument("timed path CSV: short row");
      }
      vals[k] = std::stod(cell);
    }
    path.push_back({vals[0], {vals[1], vals[2]}, vals[3]});
  }
  return path;
}

}  // namespace occuplan

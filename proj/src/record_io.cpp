#include "occuplan/record_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace occuplan {

using nlohmann::json;

namespace {

Outcome outcome_from_string(const std::string& name) {
  if (name == "goal_reached") return Outcome::kGoalReached;
  if (name == "timeout") return Outcome::kTimeout;
  if (name == "never_started") return Outcome::kNeverStarted;
  throw std::invalid_argument("record: unknown outcome: " + name);
}

}  // namespace

std::string record_to_json(const RunRecord& record) {
  json doc;
  doc["schema_version"] = 1;
  doc["scenario"] = record.scenario_name;
  doc["seed"] = record.seed;
  doc["mode"] = record.mode;
  doc["frame_period"] = record.frame_period;
  doc["goal"] = {record.goal.x, record.goal.y};
  doc["outcome"] = to_string(record.outcome);

  json ego = json::array();
  for (const TimedPose& p : record.ego) {
    ego.push_back({p.time, p.position.x, p.position.y, p.heading});
  }
  doc["ego"] = std::move(ego);

  json agents = json::array();
  for (const auto& per_frame : record.agents) {
    json frame = json::array();
    for (const AgentState& a : per_frame) {
      frame.push_back({a.agent, a.position.x, a.position.y, a.heading});
    }
    agents.push_back(std::move(frame));
  }
  doc["agents"] = std::move(agents);

  json plans = json::array();
  for (const PlanLogEntry& entry : record.plans) {
    json points = json::array();
    for (const SpaceTimePoint& p : entry.points) {
      points.push_back({p.time, p.position.x, p.position.y});
    }
    plans.push_back({{"frame", entry.frame}, {"points", std::move(points)}});
  }
  doc["plans"] = std::move(plans);

  json collisions = json::array();
  for (const CollisionEvent& c : record.collisions) {
    collisions.push_back({c.frame, c.agent});
  }
  doc["collisions"] = std::move(collisions);

  return doc.dump();
}

RunRecord record_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("record: JSON parse error: ") +
                                e.what());
  }
  if (!doc.is_object() || doc.value("schema_version", 0) != 1) {
    throw std::invalid_argument("record: unsupported document");
  }
  RunRecord record;
  record.scenario_name = doc.at("scenario").get<std::string>();
  record.seed = doc.at("seed").get<std::uint64_t>();
  record.mode = doc.at("mode").get<std::string>();
  record.frame_period = doc.at("frame_period").get<double>();
  record.goal = {doc.at("goal")[0].get<double>(),
                 doc.at("goal")[1].get<double>()};
  record.outcome = outcome_from_string(doc.at("outcome").get<std::string>());
  for (const json& p : doc.at("ego")) {
    record.ego.push_back({p[0].get<double>(),
                          {p[1].get<double>(), p[2].get<double>()},
                          p[3].get<double>()});
  }
  for (const json& frame : doc.at("agents")) {
    std::vector<AgentState> states;
    for (const json& a : frame) {
      states.push_back({a[0].get<int>(),
                        {a[1].get<double>(), a[2].get<double>()},
                        a[3].get<double>()});
    }
    record.agents.push_back(std::move(states));
  }
  for (const json& entry : doc.at("plans")) {
    PlanLogEntry log;
    log.frame = entry.at("frame").get<int>();
    for (const json& p : entry.at("points")) {
      log.points.push_back(
          {p[0].get<double>(), {p[1].get<double>(), p[2].get<double>()}});
    }
    record.plans.push_back(std::move(log));
  }
  for (const json& c : doc.at("collisions")) {
    record.collisions.push_back({c[0].get<int>(), c[1].get<int>()});
  }
  return record;
}

void write_record_file(const std::filesystem::path& path,
                       const RunRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path.string());
  }
  out << record_to_json(record) << '\n';
}

RunRecord read_record_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open for reading: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return record_from_json(buffer.str());
}

std::string metrics_to_json(const Metrics& metrics, const RunRecord& record) {
  json doc;
  doc["schema_version"] = 1;
  doc["scenario"] = record.scenario_name;
  doc["seed"] = record.seed;
  doc["mode"] = record.mode;
  doc["outcome"] = to_string(record.outcome);
  doc["success"] = metrics.success;
  doc["collisions"] = metrics.collisions;
  doc["travel_distance_m"] = metrics.travel_distance;
  doc["timesteps"] =
      metrics.timesteps ? json(*metrics.timesteps) : json(nullptr);
  doc["control_effort"] =
      metrics.control_effort ? json(*metrics.control_effort) : json(nullptr);
  doc["sudden_reversals"] = metrics.sudden_reversals
                                ? json(*metrics.sudden_reversals)
                                : json(nullptr);
  return doc.dump(2) + "\n";
}

namespace {

json aggregate_to_json(const Aggregate& a) {
  if (a.count == 0) return nullptr;
  return json{{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}};
}

}  // namespace

std::string summary_to_json(const BatchSummary& summary, std::uint64_t seed,
                            const std::string& scenario_name,
                            const std::string& mode) {
  json doc;
  doc["schema_version"] = 1;
  doc["scenario"] = scenario_name;
  doc["seed"] = seed;
  doc["mode"] = mode;
  doc["episodes"] = summary.episodes;
  doc["success_rate_percent"] = summary.success_rate;
  doc["collisions"] = aggregate_to_json(summary.collisions);
  doc["timesteps"] = aggregate_to_json(summary.timesteps);
  doc["control_effort"] = aggregate_to_json(summary.control_effort);
  doc["sudden_reversals"] = aggregate_to_json(summary.sudden_reversals);
  doc["travel_distance_m"] = aggregate_to_json(summary.travel_distance);
  return doc.dump(2) + "\n";
}

}  // namespace occuplan

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occuplan/record_io.hpp"
#include "occuplan/scenario.hpp"
#include "occuplan/traffic_sim.hpp"

namespace fs = std::filesystem;
using namespace occuplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  std::string mode;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master random seed");
  cmd->add_option("--override", opts.overrides,
                  "dotted-path override, key=value (repeatable)");
  cmd->add_option("--mode", opts.mode,
                  "planner mode: t2nod | dynamic | classical | paper-literal");
}

Scenario load_with_options(const CommonOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (!opts.mode.empty()) {
    planner_mode_from_string(opts.mode);  // validate before injecting
    overrides.push_back("ego.mode=" + opts.mode);
  }
  return load_scenario(opts.scenario_path, overrides);
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path.string());
  }
  return out;
}

void write_trajectory_csv(const fs::path& path, const RunRecord& record) {
  auto out = open_text(path);
  write_timed_path_csv(out, record.ego);
}

void dump_episode_frames(const fs::path& dir, const Scenario& scenario,
                         const RunRecord& record) {
  fs::create_directories(dir);
  for (std::size_t f = 0; f < record.ego.size(); ++f) {
    const TimedPose& p = record.ego[f];
    const Frame img =
        render_with_ego(scenario, static_cast<int>(f),
                        {p.position, p.heading, static_cast<int>(f)});
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ppm", f);
    write_ppm_file(dir / name, img);
  }
}

Frame field_ramp(const TimeField& field, int horizon) {
  Frame img(field.height(), field.width());
  for (int i = 0; i < field.height(); ++i) {
    for (int j = 0; j < field.width(); ++j) {
      const std::uint32_t v = field.at(i, j);
      std::uint8_t level = 255;
      if (v != kTimeInfinity) {
        const double x =
            std::min(1.0, static_cast<double>(v) / std::max(1, horizon));
        level = static_cast<std::uint8_t>(std::lround(255.0 * x));
      }
      img.set(i, j, {level, level, 0});
    }
  }
  return img;
}

int cmd_run(const CommonOptions& opts, bool dump_frames) {
  const Scenario scenario = load_with_options(opts);
  RunRecord record = run_episode(scenario);
  record.seed = opts.seed;

  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);
  write_record_file(out / "record.json", record);
  write_trajectory_csv(out / "trajectory.csv", record);
  const Metrics metrics = compute_metrics(record);
  open_text(out / "metrics.json") << metrics_to_json(metrics, record);
  if (dump_frames) dump_episode_frames(out / "frames", scenario, record);

  std::cout << "outcome: " << to_string(record.outcome)
            << "  collisions: " << metrics.collisions
            << "  frames: " << record.ego.size() - 1 << "\n";
  return record.outcome == Outcome::kNeverStarted ? kExitInfeasible : kExitOk;
}

int cmd_batch(const CommonOptions& opts, int episodes) {
  if (episodes < 1) {
    throw std::invalid_argument("batch: --episodes must be >= 1");
  }
  const Scenario base = load_with_options(opts);
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  std::vector<Metrics> all;
  for (int episode = 0; episode < episodes; ++episode) {
    Scenario scenario = base;
    const std::uint64_t episode_seed = derive_seed(opts.seed, episode);
    if (base.traffic) {
      const auto extra = randomize_traffic(*base.traffic, episode_seed);
      scenario.agents.insert(scenario.agents.end(), extra.begin(),
                             extra.end());
    }
    RunRecord record = run_episode(scenario);
    record.seed = episode_seed;
    const Metrics metrics = compute_metrics(record);
    all.push_back(metrics);

    char name[32];
    std::snprintf(name, sizeof(name), "episode_%03d", episode);
    const fs::path dir = out / name;
    fs::create_directories(dir);
    write_record_file(dir / "record.json", record);
    write_trajectory_csv(dir / "trajectory.csv", record);
    open_text(dir / "metrics.json") << metrics_to_json(metrics, record);
  }

  const BatchSummary summary = aggregate_metrics(all);
  const std::string table = format_batch_table(summary);
  open_text(out / "summary.json")
      << summary_to_json(summary, opts.seed, base.name,
                         to_string(base.ego.mode));
  open_text(out / "summary.txt") << table;
  std::cout << table;
  return kExitOk;
}

int cmd_fields(const CommonOptions& opts, int frame) {
  if (frame < 0) throw std::invalid_argument("fields: --frame must be >= 0");
  const Scenario scenario = load_with_options(opts);
  const Frame background = scenario_background(scenario);
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  write_ppm_file(out / "background.ppm", background);
  for (int horizon : scenario.field_horizons) {
    const FieldResult fields =
        compute_fields(scenario, background, frame, horizon);
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_T%d", horizon);
    const std::string tag(suffix);
    write_time_field_file(out / ("t2no" + tag + ".t2nf"), fields.occupancy);
    write_time_field_file(out / ("t2nd" + tag + ".t2nf"), fields.departure);
    {
      auto csv = open_text(out / ("t2no" + tag + ".csv"));
      write_time_field_csv(csv, fields.occupancy);
    }
    {
      auto csv = open_text(out / ("t2nd" + tag + ".csv"));
      write_time_field_csv(csv, fields.departure);
    }
    write_ppm_file(out / ("t2no" + tag + ".ppm"),
                   field_ramp(fields.occupancy, horizon));
    write_ppm_file(out / ("t2nd" + tag + ".ppm"),
                   field_ramp(fields.departure, horizon));

    const auto prediction = oracle_predict(scenario, frame, horizon);
    const OccupancyList list = compute_occupancy_list(
        prediction, background, scenario.thresholds, scenario.list_capacity);
    write_occupancy_list_file(out / ("list" + tag + ".t2nl"), list);
  }
  std::cout << "fields written to " << out.string() << "\n";
  return kExitOk;
}

int cmd_render(const CommonOptions& opts, int frames, bool include_ego) {
  if (frames < 1) throw std::invalid_argument("render: --frames must be >= 1");
  const Scenario scenario = load_with_options(opts);
  const fs::path dir = fs::path(opts.out_dir) / "frames";
  fs::create_directories(dir);
  for (int f = 0; f < frames; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", f);
    write_ppm_file(dir / name, render_frame(scenario, f, include_ego));
  }
  std::cout << frames << " frames written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_metrics(const std::string& record_path, const std::string& out_dir) {
  const RunRecord record = read_record_file(record_path);
  const Metrics metrics = compute_metrics(record);
  const std::string doc = metrics_to_json(metrics, record);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    open_text(fs::path(out_dir) / "metrics.json") << doc;
  }
  std::cout << doc;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "occupancy-window fields, collision checking and time-parameterized "
      "grid planning on a kinematic traffic simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, batch_opts, fields_opts, render_opts;
  bool dump_frames = false;
  int episodes = 1;
  int frame = 0;
  int render_frames = 1;
  bool include_ego = false;
  std::string record_path, metrics_out;

  CLI::App* run = app.add_subcommand("run", "run one episode");
  add_common(run, run_opts);
  run->add_flag("--dump-frames", dump_frames, "write per-frame PPM images");

  CLI::App* batch =
      app.add_subcommand("batch", "run seeded randomized-traffic episodes");
  add_common(batch, batch_opts);
  batch->add_option("--episodes", episodes, "episode count")->required();

  CLI::App* fields =
      app.add_subcommand("fields", "dump occupancy/departure fields");
  add_common(fields, fields_opts);
  fields->add_option("--frame", frame, "prediction start frame");

  CLI::App* render = app.add_subcommand("render", "dump world renders");
  add_common(render, render_opts);
  render->add_option("--frames", render_frames, "number of frames");
  render->add_flag("--include-ego", include_ego,
                   "draw the ego at its start pose");

  CLI::App* metrics =
      app.add_subcommand("metrics", "recompute metrics from a record");
  metrics->add_option("--record", record_path, "record.json path")->required();
  metrics->add_option("--out", metrics_out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, dump_frames);
    if (batch->parsed()) return cmd_batch(batch_opts, episodes);
    if (fields->parsed()) return cmd_fields(fields_opts, frame);
    if (render->parsed()) {
      return cmd_render(render_opts, render_frames, include_ego);
    }
    if (metrics->parsed()) return cmd_metrics(record_path, metrics_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}

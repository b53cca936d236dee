// Command-line front end: benchmark runs, single episodes, suite generation
// and map rendering.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topv/avpg.hpp"
#include "topv/harness.hpp"

using namespace topv;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
}

struct SuiteOptions {
  std::string dir;
  int scenes = 10;
  int episodes = 100;
  std::uint64_t seed = 1;
  int rooms = 5;

  void add(CLI::App* app) {
    app->add_option("--suite", dir, "Suite directory written by genscenes");
    app->add_option("--scenes", scenes, "Scenes to generate when no suite is given")->check(CLI::PositiveNumber);
    app->add_option("--episodes", episodes, "Episodes to generate when no suite is given")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Suite seed");
    app->add_option("--rooms", rooms, "Rooms per generated scene")->check(CLI::PositiveNumber);
  }

  Suite load() const {
    if (!dir.empty()) return load_suite(dir);
    SceneSpec spec;
    spec.rooms = rooms;
    return make_suite(seed, scenes, episodes, spec);
  }
};

struct ConfigOptions {
  std::string config_file;
  std::string reasoner;
  std::string endpoint;
  bool no_dms = false;
  bool no_ptd = false;
  std::string fusion;
  std::vector<std::string> render_ablation;
  std::optional<double> beta;
  int threads = 0;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file");
    app->add_option("--reasoner", reasoner, "heuristic | scripted | random | remote")
        ->check(CLI::IsMember({"heuristic", "scripted", "random", "remote"}));
    app->add_option("--endpoint", endpoint, "Remote reasoner URL (default: $TOPV_REASONER_URL)");
    app->add_flag("--no-dms", no_dms, "Disable dynamic map scaling");
    app->add_flag("--no-ptd", no_ptd, "Goal = best-scored key area, no target prediction");
    app->add_option("--fusion", fusion, "gaussian | max")->check(CLI::IsMember({"gaussian", "max"}));
    app->add_option("--render-ablation", render_ablation, "Drop prompt layers")
        ->check(CLI::IsMember({"history", "obstacle", "textboxes", "coordinate"}));
    app->add_option("--beta", beta, "Peak of the target Gaussian")->check(CLI::Range(0.0, 1.0));
    app->add_option("--threads", threads, "Episode threads (0 = all)");
  }

  BenchmarkConfig build() const {
    BenchmarkConfig cfg;
    if (!config_file.empty()) cfg = config_from_json(nlohmann::json::parse(read_file(config_file)), cfg);
    if (!reasoner.empty()) cfg.reasoner = *parse_reasoner_kind(reasoner);
    if (!endpoint.empty()) {
      cfg.endpoint = endpoint;
    } else if (cfg.endpoint.empty()) {
      if (const char* env = std::getenv("TOPV_REASONER_URL")) cfg.endpoint = env;
    }
    if (cfg.reasoner == ReasonerKind::Remote && cfg.endpoint.empty()) {
      throw std::invalid_argument("remote reasoner needs --endpoint or TOPV_REASONER_URL");
    }
    if (no_dms) cfg.pipeline.use_dms = false;
    if (!fusion.empty()) cfg.pipeline.goal_mode = *parse_goal_mode(fusion);
    if (no_ptd) cfg.pipeline.goal_mode = GoalMode::MarkerOnly;
    for (const auto& layer : render_ablation) {
      if (layer == "history") cfg.pipeline.layers.history = false;
      if (layer == "obstacle") cfg.pipeline.layers.obstacle = false;
      if (layer == "textboxes") cfg.pipeline.layers.textboxes = false;
      if (layer == "coordinate") cfg.pipeline.layers.coordinate = false;
    }
    if (beta) {
      if (*beta <= 0.0) throw std::invalid_argument("--beta must be in (0, 1]");
      cfg.pipeline.fusion.beta = *beta;
    }
    if (threads > 0) cfg.threads = threads;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-view object navigation simulator and reasoning engine"};
  app.require_subcommand(1);

  // run
  SuiteOptions run_suite;
  ConfigOptions run_cfg;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run a benchmark suite and report SR / SPL");
  run_suite.add(run);
  run_cfg.add(run);
  run->add_option("--out", run_out, "Directory for report.json and report.txt");

  // episode
  SuiteOptions ep_suite;
  ConfigOptions ep_cfg;
  std::size_t ep_index = 0;
  std::string dump_dir;
  auto* episode = app.add_subcommand("episode", "Run one episode of a suite");
  ep_suite.add(episode);
  ep_cfg.add(episode);
  episode->add_option("--index", ep_index, "Episode index within the suite");
  episode->add_option("--debug-dump", dump_dir, "Write per-decision maps and transcripts here");

  // genscenes
  SuiteOptions gen_suite;
  std::string gen_out;
  auto* gen = app.add_subcommand("genscenes", "Generate a scene suite");
  gen_suite.add(gen);
  gen->add_option("--out", gen_out, "Output directory")->required();

  // render
  std::string snapshot, sidecar, render_out;
  double ppm = 20.0;
  std::vector<double> pose_arg;
  auto* render = app.add_subcommand("render", "Render a prompt map from a saved map snapshot");
  render->add_option("--snapshot", snapshot, "Map raster (PGM)")->required();
  render->add_option("--sidecar", sidecar, "Map sidecar (JSON)")->required();
  render->add_option("--out", render_out, "Output PNG; the sidecar goes next to it")->required();
  render->add_option("--ppm", ppm, "Pixels per meter")->check(CLI::PositiveNumber);
  render->add_option("--pose", pose_arg, "Agent pose x y heading_deg")->expected(3);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = run_cfg.build();
      const auto suite = run_suite.load();
      const auto report = run_benchmark(suite, cfg);
      const auto table = report_table(report);
      std::cout << table;
      if (!run_out.empty()) {
        std::filesystem::create_directories(run_out);
        write_file(std::filesystem::path(run_out) / "report.json", report_json(report));
        write_file(std::filesystem::path(run_out) / "report.txt", table);
      }
    } else if (*episode) {
      const auto cfg = ep_cfg.build();
      const auto suite = ep_suite.load();
      if (ep_index >= suite.episodes.size()) throw std::out_of_range("episode index out of range");
      const Episode& ep = suite.episodes[ep_index];
      const auto it = std::find(suite.scene_ids.begin(), suite.scene_ids.end(), ep.scene_id);
      const Scene scene(suite.scenes[static_cast<std::size_t>(it - suite.scene_ids.begin())],
                        cfg.pipeline.sim.meters_per_cell);
      auto reasoner = make_reasoner(cfg, scene);
      const std::filesystem::path dir(dump_dir);
      const auto r = run_episode(scene, ep, *reasoner, cfg.pipeline, dump_dir.empty() ? nullptr : &dir);
      nlohmann::json j{{"scene", r.scene_id},       {"target", r.target},
                       {"success", r.success},      {"steps", r.steps},
                       {"path_length", r.path_length}, {"shortest_length", r.shortest_length},
                       {"decisions", r.decisions},  {"fallbacks", r.fallbacks}};
      std::cout << j.dump(2) << "\n";
    } else if (*gen) {
      const auto suite = gen_suite.load();
      save_suite(suite, gen_out);
      std::cout << "wrote " << suite.scenes.size() << " scenes and " << suite.episodes.size() << " episodes to "
                << gen_out << "\n";
    } else if (*render) {
      const auto side_text = read_file(sidecar);
      const OccupancyGrid grid = grid_from_snapshot(read_file(snapshot), side_text);
      Pose pose;
      const auto side = nlohmann::json::parse(side_text);
      if (pose_arg.size() == 3) {
        pose = {pose_arg[0], pose_arg[1], wrap_angle_positive(deg_to_rad(pose_arg[2])), 0.0};
      } else if (side.contains("pose")) {
        pose = {side["pose"][0].get<double>(), side["pose"][1].get<double>(),
                wrap_angle_positive(deg_to_rad(side["pose"][2].get<double>())), 0.0};
      } else if (!grid.trajectory().empty()) {
        const Vec2 p = grid.cell_center(grid.trajectory().back());
        pose = {p.x, p.y, 0.0, 0.0};
      } else {
        pose = {grid.world_bounds().center().x, grid.world_bounds().center().y, 0.0, 0.0};
      }
      const auto frontiers = detect_frontiers(grid);
      std::vector<Vec2> points;
      std::vector<std::string> labels;
      for (const auto& o : grid.objects()) {
        points.push_back(o.position);
        labels.push_back(o.category);
      }
      for (const auto& f : frontiers) {
        points.push_back(f.midpoint);
        labels.emplace_back();
      }
      auto markers = merge_areas(cluster_key_areas(points));
      label_markers(markers, labels);
      RenderInput in;
      in.grid = &grid;
      in.markers = markers;
      in.frontiers = frontiers;
      in.pose = pose;
      in.crop = default_crop(grid, pose);
      in.pixels_per_meter = ppm;
      const PromptMap map = render_prompt_map(in);
      write_file(render_out, encode_png(map.image));
      write_file(std::filesystem::path(render_out).replace_extension(".json"), prompt_sidecar(map) + "\n");
      std::cout << "wrote " << render_out << " (" << map.image.width() << "x" << map.image.height() << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

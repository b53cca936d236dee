#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topv/policy.hpp"
#include "topv/reasoner.hpp"
#include "topv/worldsim.hpp"

namespace topv {

// Categories every suite draws its episode targets from.
inline constexpr std::string_view kTargetCategories[] = {"chair", "bed", "plant", "toilet", "tv_monitor", "sofa"};

// Success rate and SPL as percentages. Both throw std::invalid_argument on
// an empty list.
double compute_sr(std::span<const EpisodeResult> results);
double compute_spl(std::span<const EpisodeResult> results);

struct SceneSpec {
  int rooms = 5;
  double room_min = 3.5;  // meters, interior side length
  double room_max = 5.5;
  int objects_per_room = 3;
  double door_width = 1.0;
  double wall_thickness = 0.1;
  int extra_doors = 1;  // doors beyond the spanning tree, where possible

  bool operator==(const SceneSpec&) const = default;
};

struct Room {
  Rect interior;
  std::string type;
};

struct Door {
  int a = 0;  // room indices
  int b = 0;
  Rect gap;
};

struct GeneratedScene {
  SceneData data;
  std::vector<Room> rooms;
  std::vector<Door> doors;
};

// Procedural apartment: rooms on a rectangular layout, joined by door gaps
// along a random spanning tree, furnished from a room-type table. Only
// objects that can be reached and seen from the start are kept. Throws
// SceneError when the requested layout cannot be realised.
GeneratedScene generate_scene(std::uint64_t seed, const SceneSpec& spec = {});

// True when every cell within `radius` of `p` is navigable.
bool clear_around(const Scene& scene, Vec2 p, double radius);

struct Suite {
  std::vector<std::string> scene_ids;
  std::vector<SceneData> scenes;
  std::vector<Episode> episodes;
};

// Episodes cycle through the target categories and scenes; starts are drawn
// at least `min_start_distance` meters (geodesic) from the target.
Suite make_suite(std::uint64_t seed, int num_scenes, int num_episodes, const SceneSpec& spec = {},
                 double min_start_distance = 2.0);

void save_suite(const Suite& suite, const std::filesystem::path& dir);
Suite load_suite(const std::filesystem::path& dir);

struct BenchmarkConfig {
  PipelineConfig pipeline;
  ReasonerKind reasoner = ReasonerKind::Heuristic;
  std::string endpoint;
  int threads = 0;  // 0 = OpenMP default

  bool operator==(const BenchmarkConfig&) const = default;
};

nlohmann::json config_to_json(const BenchmarkConfig& cfg);
// Fields missing from the document keep their value in `base`.
BenchmarkConfig config_from_json(const nlohmann::json& doc, BenchmarkConfig base = {});

// FNV-1a over the canonical config document.
std::string config_fingerprint(const BenchmarkConfig& cfg);

struct BenchmarkReport {
  double sr = 0.0;
  double spl = 0.0;
  std::vector<EpisodeResult> rows;
  std::string fingerprint;
  nlohmann::json config;
  int failures = 0;  // episodes that aborted with an error
};

using ReasonerFactory = std::function<std::unique_ptr<Reasoner>(const Scene&)>;

std::unique_ptr<Reasoner> make_reasoner(const BenchmarkConfig& cfg, const Scene& scene);

// Runs every episode, in parallel across episodes. Results keep suite order,
// so the report does not depend on the thread count. An episode that throws
// is counted as a failure with its error recorded.
BenchmarkReport run_benchmark(const Suite& suite, const BenchmarkConfig& cfg, const ReasonerFactory& factory = {});

std::string report_json(const BenchmarkReport& report);
std::string report_table(const BenchmarkReport& report);

}  // namespace topv

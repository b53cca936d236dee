#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topv/avpg.hpp"
#include "topv/ptd.hpp"
#include "topv/reasoner.hpp"
#include "topv/topmap.hpp"
#include "topv/worldsim.hpp"

namespace topv {

enum class PlanMode { Explore, Approach };

std::string_view to_string(PlanMode m);

struct Plan {
  std::vector<Cell> waypoints;  // grid cells, consecutive cells 8-adjacent
  Vec2 goal;
  PlanMode mode = PlanMode::Explore;

  bool empty() const { return waypoints.empty(); }
};

struct PlanOptions {
  // Soft keep-away from known obstacles: cells within the radius cost extra
  // to enter, linearly more the closer they are. Zero disables it.
  double clearance_radius = 0.0;  // meters
  double clearance_weight = 4.0;  // extra cost at contact, in orthogonal moves
};

// Optimal 8-connected path over known-Free cells. If `to` cannot be reached
// the plan ends at the reachable known-Free cell nearest to it. Empty when
// `from` is not on a known-Free cell.
Plan plan_path(const OccupancyGrid& grid, Vec2 from, Vec2 to, const PlanOptions& opts = {});

// Known-Free cells of the grid's known box as a planning graph, with the
// clearance penalties applied. Local cell (x, y) is grid cell offset + (x, y).
struct LocalSpace {
  SearchGrid graph;
  Cell offset;

  Cell to_local(Cell c) const { return {c.x - offset.x, c.y - offset.y}; }
  Cell to_grid(Cell c) const { return {c.x + offset.x, c.y + offset.y}; }
};

LocalSpace local_free_space(const OccupancyGrid& grid, const PlanOptions& opts = {});

struct PolicyConfig {
  int step_limit = 500;             // low-level actions, stop included
  int replan_interval = 25;         // actions between high-level decisions
  double heading_tolerance_deg = 15.0;
  double waypoint_radius = 0.2;     // meters
  double lookahead = 0.6;           // meters along the plan to steer at
  double stop_distance = 0.95;      // meters from the target's center
  double exhausted_radius = 1.5;    // visited moving locations are masked this far
  double clearance_radius = 0.3;
  bool look_around = true;          // turn in place once at the start

  bool operator==(const PolicyConfig&) const = default;
};

// Steering toward the plan. Pops waypoints the agent has reached (within
// the waypoint radius) or passed; nullopt once the plan is used up.
// Otherwise move_forward when the heading is within the tolerance of the
// bearing and the move stays on known-Free cells, else the turn that
// reduces the bearing error (turn_left on an exact half turn).
std::optional<Action> next_action(Plan& plan, const Pose& pose, const OccupancyGrid& grid,
                                  const PolicyConfig& cfg = {}, const SimConfig& sim = {});

enum class GoalMode {
  Gaussian,    // fused value map
  Max,         // best single candidate, no fusion
  MarkerOnly,  // best marker, no target prediction
};

std::string_view to_string(GoalMode m);
std::optional<GoalMode> parse_goal_mode(std::string_view s);

struct PipelineConfig {
  SimConfig sim;
  GridConfig grid;
  ClusterConfig cluster;
  FusionConfig fusion;
  PolicyConfig policy;
  RenderLayers layers;
  double pixels_per_meter = 20.0;
  double max_scale = 5.0;
  bool use_dms = true;
  GoalMode goal_mode = GoalMode::Gaussian;

  bool operator==(const PipelineConfig&) const = default;
};

struct Episode {
  std::string scene_id;
  std::string target;
  std::uint64_t seed = 0;
  std::optional<StartPose> start;  // scene start pose when absent
};

struct EpisodeResult {
  std::string scene_id;
  std::string target;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;                 // low-level actions taken
  double path_length = 0.0;      // meters actually moved
  double shortest_length = 0.0;  // meters, to the nearest success-disk cell
  int decisions = 0;
  int fallbacks = 0;
  bool target_seen = false;
  std::string error;             // non-empty when the episode aborted
  std::vector<Action> actions;
  std::vector<Pose> poses;       // pose after each action, start first
};

// Full loop: observe, map, prompt, reason, fuse, plan and act until stop or
// the step limit. With `debug_dir`, every decision writes its prompt map,
// value map, moving location and reasoner transcripts there.
EpisodeResult run_episode(const Scene& scene, const Episode& episode, const Reasoner& reasoner,
                          const PipelineConfig& cfg, const std::filesystem::path* debug_dir = nullptr);

}  // namespace topv

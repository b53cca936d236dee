#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "topv/harness.hpp"
#include "topv/policy.hpp"

using namespace topv;

namespace {

OccupancyGrid free_grid(int w, int h) {
  OccupancyGrid g({w, h, 0.05}, {0.0, 0.0});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) g.set({x, y}, CellState::Free);
  }
  return g;
}

Plan one_waypoint(const OccupancyGrid& g, Vec2 p) {
  Plan plan;
  plan.goal = p;
  plan.waypoints = {g.world_to_cell(p)};
  return plan;
}

OccupancyGrid random_known(std::mt19937_64& rng, int side) {
  OccupancyGrid g({side, side, 0.05}, {0.0, 0.0});
  std::bernoulli_distribution unknown(0.1), blocked(0.25);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (unknown(rng)) continue;
      g.set({x, y}, blocked(rng) ? CellState::Obstacle : CellState::Free);
    }
  }
  return g;
}

std::vector<Cell> free_cells(const OccupancyGrid& g) {
  std::vector<Cell> out;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.at({x, y}) == CellState::Free) out.push_back({x, y});
    }
  }
  return out;
}

SceneData room_with_bed() {
  SceneData d;
  d.width = 8.0;
  d.height = 8.0;
  d.objects.push_back({"bed", {5.0, 4.0}, {4.6, 3.6, 0.8, 0.8}});
  d.start = StartPose{{4.2, 4.0}, 0.0};
  d.targets = {"bed"};
  return d;
}

}  // namespace

TEST_CASE("next_action steering examples") {
  const auto g = free_grid(100, 100);
  const Pose pose{2.525, 2.525, 0.0, 0.0};

  auto ahead = one_waypoint(g, {3.025, 2.525});
  CHECK(next_action(ahead, pose, g) == Action::MoveForward);

  auto left = one_waypoint(g, {2.525, 3.025});
  CHECK(next_action(left, pose, g) == Action::TurnLeft);

  auto right = one_waypoint(g, {2.525, 2.025});
  CHECK(next_action(right, pose, g) == Action::TurnRight);

  auto behind = one_waypoint(g, {1.525, 2.525});
  CHECK(next_action(behind, pose, g) == Action::TurnLeft);

  // Reached waypoints are popped; an exhausted plan yields nothing.
  auto here = one_waypoint(g, {2.575, 2.525});
  CHECK_FALSE(next_action(here, pose, g).has_value());
  CHECK(here.empty());
}

TEST_CASE("next_action never steps off known-Free cells") {
  auto g = free_grid(100, 100);
  for (int y = 0; y < 100; ++y) g.set({55, y}, CellState::Obstacle);
  const Pose pose{2.7, 2.525, 0.0, 0.0};
  auto plan = one_waypoint(g, {3.2, 2.525});
  const auto a = next_action(plan, pose, g);
  CHECK(a != Action::MoveForward);
}

TEST_CASE("plan_path basics") {
  const auto g = free_grid(60, 60);
  const auto same = plan_path(g, {1.0, 1.0}, {1.0, 1.0});
  REQUIRE(same.waypoints.size() == 1);
  CHECK(same.waypoints[0] == g.world_to_cell({1.0, 1.0}));

  OccupancyGrid unknown({20, 20, 0.05}, {0.0, 0.0});
  CHECK(plan_path(unknown, {0.5, 0.5}, {0.7, 0.7}).empty());

  // Known corridor that ends at unexplored space: the plan stops at its end.
  OccupancyGrid corridor({60, 60, 0.05}, {0.0, 0.0});
  for (int x = 0; x < 30; ++x) corridor.set({x, 10}, CellState::Free);
  corridor.set({59, 59}, CellState::Obstacle);
  const auto p = plan_path(corridor, corridor.cell_center({0, 10}), corridor.cell_center({50, 10}));
  REQUIRE_FALSE(p.empty());
  CHECK(p.waypoints.back() == Cell{29, 10});
}

TEST_CASE("plan_path is optimal and falls back to the nearest reachable cell") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_known(rng, 40);
    const auto cells = free_cells(g);
    if (cells.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    const Cell a = cells[pick(rng)];
    const Cell b = cells[pick(rng)];
    const auto plan = plan_path(g, g.cell_center(a), g.cell_center(b));
    REQUIRE_FALSE(plan.empty());
    CHECK(plan.waypoints.front() == a);

    const LocalSpace ls = local_free_space(g);
    std::vector<Cell> local;
    for (auto c : plan.waypoints) local.push_back(ls.to_local(c));
    const auto cost = oracle::path_cost(ls.graph, local);
    REQUIRE(cost >= 0);

    const auto direct = oracle::ucs_cost(ls.graph, ls.to_local(a), ls.to_local(b));
    if (direct != kUnreachable) {
      CHECK(plan.waypoints.back() == b);
      CHECK(cost == direct);
      continue;
    }
    // Unreachable goal: the end is the reachable cell nearest to it (ties by
    // row, then column) and the path to it is optimal.
    const auto field = cost_field(ls.graph, {ls.to_local(a)});
    Cell best{-1, -1};
    double bd = std::numeric_limits<double>::infinity();
    for (int y = 0; y < ls.graph.rows; ++y) {
      for (int x = 0; x < ls.graph.cols; ++x) {
        if (field[ls.graph.index({x, y})] == kUnreachable) continue;
        const Cell c = ls.to_grid({x, y});
        const double d = std::hypot(c.x - b.x, c.y - b.y);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
    }
    CHECK(plan.waypoints.back() == best);
    CHECK(cost == oracle::ucs_cost(ls.graph, ls.to_local(a), ls.to_local(best)));
  }
}

TEST_CASE("target in view ahead is a near-trivial success") {
  const Scene scene(room_with_bed());
  const HeuristicReasoner h;
  PipelineConfig cfg;
  cfg.policy.look_around = false;
  const auto r = run_episode(scene, {"room", "bed", 1, std::nullopt}, h, cfg);
  CHECK(r.success);
  CHECK(r.steps <= 5);
  CHECK(r.actions.back() == Action::Stop);
  CHECK(compute_spl(std::vector{r}) > 99.0);
}

TEST_CASE("walled-off target runs into the step limit") {
  auto d = room_with_bed();
  d.start = StartPose{{1.0, 1.0}, 0.0};
  // A closed box around the bed.
  d.walls = {{4.0, 3.0, 2.0, 0.1}, {4.0, 4.9, 2.0, 0.1}, {4.0, 3.0, 0.1, 2.0}, {5.9, 3.0, 0.1, 2.0}};
  const Scene scene(d);
  const HeuristicReasoner h;
  PipelineConfig cfg;
  cfg.policy.step_limit = 120;
  const auto r = run_episode(scene, {"room", "bed", 1, std::nullopt}, h, cfg);
  CHECK_FALSE(r.success);
  CHECK(r.steps == 120);
}

TEST_CASE("episode invariants on generated scenes") {
  const auto suite = make_suite(3, 3, 6);
  for (std::size_t i = 0; i < suite.episodes.size(); ++i) {
    const auto& ep = suite.episodes[i];
    const auto k = static_cast<std::size_t>(std::find(suite.scene_ids.begin(), suite.scene_ids.end(), ep.scene_id) -
                                            suite.scene_ids.begin());
    const Scene scene(suite.scenes[k]);
    const ScriptedReasoner s(scene);
    PipelineConfig cfg;
    const auto a = run_episode(scene, ep, s, cfg);
    CHECK(a.success);
    CHECK(a.steps <= cfg.policy.step_limit);
    CHECK(a.actions.size() == static_cast<std::size_t>(a.steps));
    CHECK(a.poses.size() == a.actions.size() + 1);
    for (const auto& p : a.poses) CHECK(scene.navigable(p.position()));
    CHECK(a.shortest_length > 0.0);

    const auto b = run_episode(scene, ep, s, cfg);
    CHECK(a.actions == b.actions);
    CHECK(a.poses == b.poses);
  }
}

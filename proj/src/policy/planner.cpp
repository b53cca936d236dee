#include <algorithm>
#include <cmath>
#include <limits>

#include "topv/policy.hpp"
#include "topv/raycast.hpp"

namespace topv {

std::string_view to_string(PlanMode m) { return m == PlanMode::Explore ? "explore" : "approach"; }

LocalSpace local_free_space(const OccupancyGrid& grid, const PlanOptions& opts) {
  LocalSpace ls;
  const auto box = grid.known_box();
  if (!box) return ls;
  ls.offset = box->lo;
  auto& g = ls.graph;
  g.cols = box->hi.x - box->lo.x + 1;
  g.rows = box->hi.y - box->lo.y + 1;
  g.passable.assign(static_cast<std::size_t>(g.cols) * g.rows, 0);
  for (int y = 0; y < g.rows; ++y) {
    for (int x = 0; x < g.cols; ++x) {
      g.passable[g.index({x, y})] = grid.at(ls.to_grid({x, y})) == CellState::Free ? 1 : 0;
    }
  }
  if (opts.clearance_radius <= 0.0) return ls;

  const double res = grid.meters_per_cell();
  const int r = static_cast<int>(std::ceil(opts.clearance_radius / res));
  const double top = opts.clearance_weight * static_cast<double>(kOrthCost);
  // Stamp a falling cone around every known obstacle; keep the maximum.
  std::vector<std::int64_t> stamp;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double d = std::hypot(dx, dy) * res;
      stamp.push_back(d < opts.clearance_radius ? static_cast<std::int64_t>(top * (1.0 - d / opts.clearance_radius))
                                                : 0);
    }
  }
  g.penalty.assign(g.passable.size(), 0);
  for (int y = 0; y < g.rows; ++y) {
    for (int x = 0; x < g.cols; ++x) {
      if (grid.at(ls.to_grid({x, y})) != CellState::Obstacle) continue;
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx, ++k) {
          const Cell c{x + dx, y + dy};
          if (stamp[k] == 0 || !g.in_bounds(c)) continue;
          auto& p = g.penalty[g.index(c)];
          p = std::max(p, stamp[k]);
        }
      }
    }
  }
  return ls;
}

Plan plan_path(const OccupancyGrid& grid, Vec2 from, Vec2 to, const PlanOptions& opts) {
  Plan plan;
  plan.goal = to;
  const Cell start = grid.world_to_cell(from);
  if (grid.at(start) != CellState::Free) return plan;
  const LocalSpace ls = local_free_space(grid, opts);
  // Goals outside the known box are pulled onto its edge; the nearest
  // reachable cell to the pulled goal is then searched as usual.
  Cell goal = ls.to_local(grid.world_to_cell(to));
  goal = {std::clamp(goal.x, 0, ls.graph.cols - 1), std::clamp(goal.y, 0, ls.graph.rows - 1)};
  if (auto p = astar_or_nearest(ls.graph, ls.to_local(start), goal)) {
    for (const Cell c : p->cells) plan.waypoints.push_back(ls.to_grid(c));
  }
  return plan;
}

namespace {

double bearing_error(const Pose& pose, Vec2 target) {
  const Vec2 d = target - pose.position();
  return wrap_angle_signed(std::atan2(d.y, d.x) - pose.heading);
}

bool free_segment(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
  return traverse_cells(a, b, grid.origin(), grid.meters_per_cell(),
                        [&](Cell c) { return grid.at(c) == CellState::Free; });
}

}  // namespace

std::optional<Action> next_action(Plan& plan, const Pose& pose, const OccupancyGrid& grid, const PolicyConfig& cfg,
                                  const SimConfig& sim) {
  auto& wp = plan.waypoints;
  const Vec2 here = pose.position();

  // Waypoints before the nearest one (looking a little way ahead) are passed.
  const std::size_t window = std::min<std::size_t>(wp.size(), 60);
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < window; ++i) {
    const double d = distance(grid.cell_center(wp[i]), here);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  wp.erase(wp.begin(), wp.begin() + static_cast<std::ptrdiff_t>(nearest));
  while (!wp.empty() && distance(grid.cell_center(wp.front()), here) <= cfg.waypoint_radius) wp.erase(wp.begin());
  if (wp.empty()) return std::nullopt;

  // Steer at the farthest waypoint within the lookahead that is in straight
  // free sight; the next waypoint otherwise.
  std::size_t aim = 0;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    const Vec2 p = grid.cell_center(wp[i]);
    if (distance(p, here) > cfg.lookahead) break;
    if (free_segment(grid, here, p)) aim = i;
  }

  const Vec2 aim_point = grid.cell_center(wp[aim]);
  const double tol = deg_to_rad(cfg.heading_tolerance_deg) + 1e-9;
  auto step_from = [&](double heading) {
    return here + Vec2{std::cos(heading), std::sin(heading)} * sim.forward_step;
  };
  const double e = bearing_error(pose, aim_point);
  if (std::abs(e) <= tol && free_segment(grid, here, step_from(pose.heading))) return Action::MoveForward;

  // Otherwise pick, among the headings reachable by turning, the one whose
  // step lands closest to the aim point, and turn toward it the short way.
  const int n = std::max(1, static_cast<int>(std::lround(360.0 / sim.turn_deg)));
  const double now = distance(here, aim_point);
  int best_k = -1;
  double best_d = now - 1e-9;
  for (int i = 0; i < n; ++i) {
    // Visit k = 0, 1, n-1, 2, n-2, ... so fewer turns win ties, left first.
    const int k = i == 0 ? 0 : (i % 2 == 1 ? (i + 1) / 2 : n - i / 2);
    const Vec2 q = step_from(pose.heading + k * deg_to_rad(sim.turn_deg));
    if (!free_segment(grid, here, q)) continue;
    const double d = distance(q, aim_point);
    if (d < best_d - 1e-9) {
      best_d = d;
      best_k = k;
    }
  }
  if (best_k < 0) {
    // No single step gets closer; the plan cannot be followed from here.
    wp.clear();
    return std::nullopt;
  }
  if (best_k == 0) return Action::MoveForward;
  return best_k <= n - best_k ? Action::TurnLeft : Action::TurnRight;
}

}  // namespace topv

#pragma once

#include <cmath>
#include <limits>

#include "topv/geometry.hpp"

namespace topv {

// Amanatides-Woo traversal of the cells of a uniform grid (cell size `res`,
// cell (0,0) with lower-left corner at `origin`) crossed by the segment
// from -> to, in order. `visit(cell)` returns false to stop early.
// Returns false iff the traversal was stopped by the visitor.
template <typename Visitor>
bool traverse_cells(Vec2 from, Vec2 to, Vec2 origin, double res, Visitor&& visit) {
  const double fx = (from.x - origin.x) / res;
  const double fy = (from.y - origin.y) / res;
  const double tx = (to.x - origin.x) / res;
  const double ty = (to.y - origin.y) / res;

  Cell c{static_cast<int>(std::floor(fx)), static_cast<int>(std::floor(fy))};
  const Cell end{static_cast<int>(std::floor(tx)), static_cast<int>(std::floor(ty))};

  const double dx = tx - fx;
  const double dy = ty - fy;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();

  const double t_delta_x = step_x != 0 ? std::abs(1.0 / dx) : inf;
  const double t_delta_y = step_y != 0 ? std::abs(1.0 / dy) : inf;
  double t_max_x = inf;
  double t_max_y = inf;
  if (step_x > 0) t_max_x = (std::floor(fx) + 1.0 - fx) * t_delta_x;
  if (step_x < 0) t_max_x = (fx - std::floor(fx)) * t_delta_x;
  if (step_y > 0) t_max_y = (std::floor(fy) + 1.0 - fy) * t_delta_y;
  if (step_y < 0) t_max_y = (fy - std::floor(fy)) * t_delta_y;

  // Bounded by the Manhattan cell distance; guards against float drift.
  const int max_steps = std::abs(end.x - c.x) + std::abs(end.y - c.y);
  if (!visit(c)) return false;
  for (int i = 0; i < max_steps; ++i) {
    if (t_max_x < t_max_y) {
      c.x += step_x;
      t_max_x += t_delta_x;
    } else {
      c.y += step_y;
      t_max_y += t_delta_y;
    }
    if (!visit(c)) return false;
    if (c == end) break;
  }
  return true;
}

}  // namespace topv

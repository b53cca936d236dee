#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "topv/geometry.hpp"

namespace topv {

// Move costs in fixed point so that optimal path costs compare exactly.
// The diagonal weight is sqrt(2) rounded to 1e-6; lengths in meters are
// recomputed from the move counts with the exact constant.
inline constexpr std::int64_t kOrthCost = 1'000'000;
inline constexpr std::int64_t kDiagCost = 1'414'214;

// 8-connected grid graph. Diagonal moves may not cut a corner: both
// orthogonally adjacent cells must be passable.
struct SearchGrid {
  int cols = 0;
  int rows = 0;
  std::vector<std::uint8_t> passable;  // row-major, 1 = traversable
  std::vector<std::int64_t> penalty;   // optional per-cell entry cost, empty = none

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < cols && c.y < rows; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * cols + c.x; }
  bool is_passable(Cell c) const { return in_bounds(c) && passable[index(c)] != 0; }
};

struct PathResult {
  std::vector<Cell> cells;  // from start to goal inclusive
  std::int64_t cost = 0;
  int orth_moves = 0;
  int diag_moves = 0;

  // Geometric length in meters (penalties excluded).
  double length(double meters_per_cell) const;
};

// Octile-distance A* from `from` to `to`. nullopt when either endpoint is
// blocked or no path exists.
std::optional<PathResult> astar(const SearchGrid& grid, Cell from, Cell to);

// Uniform-cost search to the cheapest cell satisfying `is_goal`.
std::optional<PathResult> search_to_any(const SearchGrid& grid, Cell from,
                                        const std::function<bool(Cell)>& is_goal);

// A* to `to`; if `to` is unreachable, returns the path to the reachable cell
// Euclidean-nearest to `to` (ties: lowest row, then column). nullopt only
// when `from` is blocked.
std::optional<PathResult> astar_or_nearest(const SearchGrid& grid, Cell from, Cell to);

inline constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

// Multi-source uniform-cost distances (fixed-point units) to every cell;
// kUnreachable where no source can be reached.
std::vector<std::int64_t> cost_field(const SearchGrid& grid, const std::vector<Cell>& sources);

}  // namespace topv

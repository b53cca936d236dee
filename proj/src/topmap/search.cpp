#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "topv/search.hpp"

namespace topv {

double PathResult::length(double meters_per_cell) const {
  return (orth_moves + diag_moves * std::numbers::sqrt2) * meters_per_cell;
}

namespace {

constexpr std::int64_t kUnvisited = kUnreachable;

struct Move {
  int dx, dy;
  bool diagonal;
};
constexpr std::array<Move, 8> kMoves{{{1, 0, false},
                                      {-1, 0, false},
                                      {0, 1, false},
                                      {0, -1, false},
                                      {1, 1, true},
                                      {1, -1, true},
                                      {-1, 1, true},
                                      {-1, -1, true}}};

std::int64_t octile(Cell a, Cell b) {
  const std::int64_t dx = std::abs(a.x - b.x);
  const std::int64_t dy = std::abs(a.y - b.y);
  const std::int64_t lo = std::min(dx, dy);
  const std::int64_t hi = std::max(dx, dy);
  return lo * kDiagCost + (hi - lo) * kOrthCost;
}

struct Open {
  std::int64_t f;
  std::int64_t g;
  std::size_t index;
  // Min-heap on f, then larger g (deeper first), then index for determinism.
  bool operator>(const Open& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return index > o.index;
  }
};

// Best-first search state shared by all entry points.
class Searcher {
 public:
  explicit Searcher(const SearchGrid& grid)
      : grid_(grid),
        g_(static_cast<std::size_t>(grid.cols) * grid.rows, kUnvisited),
        parent_(g_.size(), std::numeric_limits<std::size_t>::max()),
        closed_(g_.size(), 0) {}

  // Runs until a goal is expanded (returns its index) or the frontier is
  // exhausted (returns nullopt).
  template <typename IsGoal, typename Heuristic>
  std::optional<std::size_t> run(Cell from, IsGoal&& is_goal, Heuristic&& h) {
    const auto start = grid_.index(from);
    g_[start] = 0;
    parent_[start] = start;
    std::priority_queue<Open, std::vector<Open>, std::greater<>> open;
    open.push({h(from), 0, start});
    while (!open.empty()) {
      const Open cur = open.top();
      open.pop();
      if (closed_[cur.index]) continue;
      closed_[cur.index] = 1;
      const Cell c = cell(cur.index);
      if (is_goal(c)) return cur.index;
      for (const auto& m : kMoves) {
        const Cell n{c.x + m.dx, c.y + m.dy};
        if (!grid_.is_passable(n)) continue;
        if (m.diagonal && (!grid_.is_passable({c.x + m.dx, c.y}) || !grid_.is_passable({c.x, c.y + m.dy}))) {
          continue;
        }
        const auto ni = grid_.index(n);
        if (closed_[ni]) continue;
        std::int64_t ng = cur.g + (m.diagonal ? kDiagCost : kOrthCost);
        if (!grid_.penalty.empty()) ng += grid_.penalty[ni];
        if (ng < g_[ni]) {
          g_[ni] = ng;
          parent_[ni] = cur.index;
          open.push({ng + h(n), ng, ni});
        }
      }
    }
    return std::nullopt;
  }

  PathResult reconstruct(std::size_t goal) const {
    PathResult r;
    r.cost = g_[goal];
    std::size_t i = goal;
    r.cells.push_back(cell(i));
    while (parent_[i] != i) {
      const std::size_t p = parent_[i];
      const Cell a = cell(i);
      const Cell b = cell(p);
      if (a.x != b.x && a.y != b.y) {
        ++r.diag_moves;
      } else {
        ++r.orth_moves;
      }
      r.cells.push_back(b);
      i = p;
    }
    std::reverse(r.cells.begin(), r.cells.end());
    return r;
  }

  bool closed(std::size_t i) const { return closed_[i] != 0; }
  Cell cell(std::size_t i) const {
    return {static_cast<int>(i % grid_.cols), static_cast<int>(i / grid_.cols)};
  }

 private:
  const SearchGrid& grid_;
  std::vector<std::int64_t> g_;
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> closed_;
};

}  // namespace

std::optional<PathResult> astar(const SearchGrid& grid, Cell from, Cell to) {
  if (!grid.is_passable(from) || !grid.is_passable(to)) return std::nullopt;
  Searcher s(grid);
  auto goal = s.run(from, [&](Cell c) { return c == to; }, [&](Cell c) { return octile(c, to); });
  if (!goal) return std::nullopt;
  return s.reconstruct(*goal);
}

std::optional<PathResult> search_to_any(const SearchGrid& grid, Cell from,
                                        const std::function<bool(Cell)>& is_goal) {
  if (!grid.is_passable(from)) return std::nullopt;
  Searcher s(grid);
  auto goal = s.run(from, is_goal, [](Cell) { return std::int64_t{0}; });
  if (!goal) return std::nullopt;
  return s.reconstruct(*goal);
}

std::optional<PathResult> astar_or_nearest(const SearchGrid& grid, Cell from, Cell to) {
  if (!grid.is_passable(from)) return std::nullopt;
  Searcher s(grid);
  const bool goal_open = grid.is_passable(to);
  auto goal = s.run(
      from, [&](Cell c) { return goal_open && c == to; },
      [&](Cell c) { return goal_open ? octile(c, to) : std::int64_t{0}; });
  if (goal) return s.reconstruct(*goal);

  // Exhausted: every reachable cell is closed with its optimal cost.
  std::size_t best = grid.index(from);
  double best_d2 = std::numeric_limits<double>::infinity();
  const std::size_t n = static_cast<std::size_t>(grid.cols) * grid.rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.closed(i)) continue;
    const Cell c = s.cell(i);
    const double dx = c.x - to.x;
    const double dy = c.y - to.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return s.reconstruct(best);
}

std::vector<std::int64_t> cost_field(const SearchGrid& grid, const std::vector<Cell>& sources) {
  std::vector<std::int64_t> dist(static_cast<std::size_t>(grid.cols) * grid.rows, kUnreachable);
  using Entry = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (const Cell s : sources) {
    if (!grid.is_passable(s)) continue;
    dist[grid.index(s)] = 0;
    open.push({0, grid.index(s)});
  }
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (d != dist[i]) continue;
    const Cell c{static_cast<int>(i % grid.cols), static_cast<int>(i / grid.cols)};
    for (const auto& m : kMoves) {
      const Cell n{c.x + m.dx, c.y + m.dy};
      if (!grid.is_passable(n)) continue;
      if (m.diagonal && (!grid.is_passable({c.x + m.dx, c.y}) || !grid.is_passable({c.x, c.y + m.dy}))) continue;
      const auto ni = grid.index(n);
      const std::int64_t nd = d + (m.diagonal ? kDiagCost : kOrthCost);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        open.push({nd, ni});
      }
    }
  }
  return dist;
}

}  // namespace topv

#pragma once

// Independent brute-force references used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "topv/avpg.hpp"
#include "topv/ptd.hpp"
#include "topv/search.hpp"
#include "topv/topmap.hpp"

namespace oracle {

using topv::Cell;
using topv::Vec2;

using Partition = std::set<std::set<std::size_t>>;

// Classic DBSCAN: region queries, seed-set expansion from each unvisited
// core point. Border points go to the cluster of their nearest core point
// (smaller position on exact ties), making the result order-free.
inline std::vector<int> dbscan(const std::vector<Vec2>& pts, double eps, int min_pts) {
  const int n = static_cast<int>(pts.size());
  auto region = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      if (dx * dx + dy * dy <= eps * eps) out.push_back(j);
    }
    return out;
  };
  std::vector<char> core(n);
  for (int i = 0; i < n; ++i) core[i] = static_cast<int>(region(i).size()) >= min_pts;

  std::vector<int> label(n, -1);
  int c = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i] || label[i] >= 0) continue;
    label[i] = c;
    std::vector<int> seeds = region(i);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const int q = seeds[k];
      if (!core[q] || label[q] >= 0) continue;
      label[q] = c;
      for (int r : region(q)) seeds.push_back(r);
    }
    ++c;
  }
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j : region(i)) {
      if (!core[j]) continue;
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      const bool smaller = best >= 0 && (pts[j].x < pts[best].x || (pts[j].x == pts[best].x && pts[j].y < pts[best].y));
      if (d < bd || (d == bd && smaller)) {
        bd = d;
        best = j;
      }
    }
    if (best >= 0) label[i] = label[best];
  }
  return label;
}

inline std::vector<std::set<std::size_t>> groups_of(const std::vector<int>& label) {
  std::map<int, std::set<std::size_t>> g;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] >= 0) g[label[i]].insert(i);
  }
  std::vector<std::set<std::size_t>> out;
  for (auto& [k, v] : g) out.push_back(v);
  return out;
}

// Areas ordered by their smallest member position, then merged by rounds:
// each round joins every pair whose member means are within eps, closes the
// joins transitively, and recomputes the means; stops when a round joins
// nothing.
inline Partition merge_fixed_point(const std::vector<Vec2>& pts, std::vector<std::set<std::size_t>> areas, double eps) {
  auto less = [&](std::size_t a, std::size_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  };
  auto first = [&](const std::set<std::size_t>& s) { return *std::min_element(s.begin(), s.end(), less); };
  std::sort(areas.begin(), areas.end(), [&](const auto& a, const auto& b) { return less(first(a), first(b)); });
  auto mean = [&](const std::set<std::size_t>& s) {
    std::vector<std::size_t> idx(s.begin(), s.end());
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return less(a, b) || (!less(b, a) && a < b); });
    Vec2 m;
    for (auto i : idx) m = m + pts[i];
    return m / static_cast<double>(idx.size());
  };
  for (;;) {
    const std::size_t n = areas.size();
    std::vector<Vec2> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = mean(areas[i]);
    // Label propagation until stable: each area takes the smallest label
    // among itself and its within-eps neighbours.
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = i;
    bool joined = false;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const Vec2 d = c[i] - c[j];
          if (d.x * d.x + d.y * d.y > eps * eps) continue;
          joined = true;
          if (label[j] < label[i]) {
            label[i] = label[j];
            changed = true;
          }
        }
      }
    }
    if (!joined) break;
    std::map<std::size_t, std::set<std::size_t>> merged;
    for (std::size_t i = 0; i < n; ++i) merged[label[i]].insert(areas[i].begin(), areas[i].end());
    areas.clear();
    for (auto& [k, v] : merged) areas.push_back(v);
  }
  return Partition(areas.begin(), areas.end());
}

inline Partition partition_of(const std::vector<topv::KeyAreaMarker>& markers) {
  Partition p;
  for (const auto& m : markers) p.insert(std::set<std::size_t>(m.member_indices.begin(), m.member_indices.end()));
  return p;
}

// Dijkstra over an explicit edge relaxation, same move rules as the planner:
// 8 moves, no corner cutting, entry penalty added to the move cost.
inline std::int64_t ucs_cost(const topv::SearchGrid& g, Cell from, Cell to) {
  if (!g.is_passable(from) || !g.is_passable(to)) return topv::kUnreachable;
  std::map<std::pair<int, int>, std::int64_t> dist;
  using Item = std::pair<std::int64_t, std::pair<int, int>>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[{from.x, from.y}] = 0;
  pq.push({0, {from.x, from.y}});
  while (!pq.empty()) {
    auto [d, xy] = pq.top();
    pq.pop();
    if (d != dist[xy]) continue;
    if (xy == std::pair{to.x, to.y}) return d;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell n{xy.first + dx, xy.second + dy};
        if (!g.is_passable(n)) continue;
        if (dx != 0 && dy != 0 &&
            (!g.is_passable({xy.first + dx, xy.second}) || !g.is_passable({xy.first, xy.second + dy}))) {
          continue;
        }
        std::int64_t w = (dx != 0 && dy != 0) ? topv::kDiagCost : topv::kOrthCost;
        if (!g.penalty.empty()) w += g.penalty[g.index(n)];
        auto it = dist.find({n.x, n.y});
        if (it == dist.end() || d + w < it->second) {
          dist[{n.x, n.y}] = d + w;
          pq.push({d + w, {n.x, n.y}});
        }
      }
    }
  }
  return topv::kUnreachable;
}

// Cost of a cell path under the same move rules, or -1 if it is not a
// valid path.
inline std::int64_t path_cost(const topv::SearchGrid& g, const std::vector<Cell>& cells) {
  std::int64_t c = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const int dx = cells[i].x - cells[i - 1].x, dy = cells[i].y - cells[i - 1].y;
    if (std::abs(dx) > 1 || std::abs(dy) > 1 || (dx == 0 && dy == 0) || !g.is_passable(cells[i])) return -1;
    if (dx != 0 && dy != 0 &&
        (!g.is_passable({cells[i - 1].x + dx, cells[i - 1].y}) || !g.is_passable({cells[i - 1].x, cells[i - 1].y + dy}))) {
      return -1;
    }
    c += (dx != 0 && dy != 0) ? topv::kDiagCost : topv::kOrthCost;
    if (!g.penalty.empty()) c += g.penalty[g.index(cells[i])];
  }
  return c;
}

inline topv::SearchGrid random_grid(std::mt19937_64& rng, int cols, int rows, double density) {
  topv::SearchGrid g;
  g.cols = cols;
  g.rows = rows;
  std::bernoulli_distribution block(density);
  g.passable.resize(static_cast<std::size_t>(cols) * rows);
  for (auto& p : g.passable) p = block(rng) ? 0 : 1;
  return g;
}

// sigma with exp(-d^2 / (2 sigma^2)) = level, by bisection on sigma.
inline double solve_sigma(double d, double level) {
  double lo = 1e-9, hi = 1e9;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = std::exp(-d * d / (2.0 * mid * mid));
    (v < level ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// Argmax of the fused field sampled k times finer than the grid, over fine
// points whose coarse cell is known-Free; returned as the coarse cell.
inline Cell fine_argmax(const std::vector<topv::GaussianTerm>& terms, const topv::OccupancyGrid& grid, int k) {
  const double h = grid.meters_per_cell() / k;
  double best = -1.0;
  Cell arg{-1, -1};
  for (int fy = 0; fy < grid.height() * k; ++fy) {
    for (int fx = 0; fx < grid.width() * k; ++fx) {
      const Cell c{fx / k, fy / k};
      if (grid.at(c) != topv::CellState::Free) continue;
      const Vec2 p{grid.origin().x + (fx + 0.5) * h, grid.origin().y + (fy + 0.5) * h};
      double v = 0.0;
      for (const auto& t : terms) {
        const double dx = p.x - t.mean.x, dy = p.y - t.mean.y;
        v += t.peak * std::exp(-(dx * dx + dy * dy) / (2.0 * t.sigma * t.sigma));
      }
      if (v > best) {
        best = v;
        arg = c;
      }
    }
  }
  return arg;
}

// Free cells 4-adjacent to Unknown, by a plain scan.
inline std::set<std::pair<int, int>> frontier_cells(const topv::OccupancyGrid& g) {
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.at({x, y}) != topv::CellState::Free) continue;
      const Cell nb[] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
      for (const auto& n : nb) {
        if (g.in_bounds(n) && g.at(n) == topv::CellState::Unknown) {
          out.insert({x, y});
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace oracle

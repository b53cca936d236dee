#include <algorithm>
#include <array>
#include <limits>

#include "topv/topmap.hpp"

namespace topv {

namespace {

bool is_frontier_cell(const OccupancyGrid& grid, Cell c) {
  if (grid.at(c) != CellState::Free) return false;
  constexpr std::array<Cell, 4> kN4{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (const auto d : kN4) {
    const Cell n{c.x + d.x, c.y + d.y};
    // Cells off the grid are not Unknown: the map simply ends there.
    if (grid.in_bounds(n) && grid.at(n) == CellState::Unknown) return true;
  }
  return false;
}

}  // namespace

namespace kernels {

std::vector<std::uint8_t> frontier_mask_serial(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.width()) * grid.height(), 0);
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      mask[grid.index({x, y})] = is_frontier_cell(grid, {x, y}) ? 1 : 0;
    }
  }
  return mask;
}

std::vector<std::uint8_t> frontier_mask_parallel(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.width()) * grid.height(), 0);
  const auto box = grid.known_box();
  if (!box) return mask;
  // Frontier cells are Free, so only the known box needs scanning.
  const int y0 = box->lo.y;
  const int y1 = box->hi.y;
  const int x0 = box->lo.x;
  const int x1 = box->hi.x;
#pragma omp parallel for schedule(static)
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      mask[grid.index({x, y})] = is_frontier_cell(grid, {x, y}) ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace kernels

std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid) {
  std::vector<Frontier> out;
  const auto box = grid.known_box();
  if (!box) return out;
  auto mask = kernels::frontier_mask_parallel(grid);

  // 8-connected components in row-major discovery order.
  std::vector<Cell> stack;
  for (int y = box->lo.y; y <= box->hi.y; ++y) {
    for (int x = box->lo.x; x <= box->hi.x; ++x) {
      if (mask[grid.index({x, y})] != 1) continue;
      Frontier f;
      mask[grid.index({x, y})] = 2;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        f.cells.push_back(c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Cell n{c.x + dx, c.y + dy};
            if (!grid.in_bounds(n)) continue;
            auto& m = mask[grid.index(n)];
            if (m == 1) {
              m = 2;
              stack.push_back(n);
            }
          }
        }
      }
      if (f.cells.size() < kMinFrontierCells) continue;
      std::sort(f.cells.begin(), f.cells.end());
      double sx = 0.0, sy = 0.0;
      for (const auto c : f.cells) {
        sx += c.x;
        sy += c.y;
      }
      const double cx = sx / f.cells.size();
      const double cy = sy / f.cells.size();
      Cell best = f.cells.front();
      double best_d2 = std::numeric_limits<double>::infinity();
      for (const auto c : f.cells) {
        const double d2 = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      f.midpoint = grid.cell_center(best);
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace topv

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topv/geometry.hpp"
#include "topv/search.hpp"
#include "topv/worldsim.hpp"

namespace topv {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

struct GridConfig {
  int width = 1000;  // cells
  int height = 1000;
  double meters_per_cell = 0.05;  // 20 cells per meter

  bool operator==(const GridConfig&) const = default;
};

struct DetectedObject {
  std::string category;
  Vec2 position;
  int first_seen = 0;

  bool operator==(const DetectedObject&) const = default;
};

struct Frontier {
  std::vector<Cell> cells;  // sorted by (row, col)
  Vec2 midpoint;
};

// Agent-side top-view map. Cell (0,0) has its lower-left corner at origin().
class OccupancyGrid {
 public:
  OccupancyGrid(GridConfig cfg, Vec2 origin);

  // Grid of the configured size whose center holds `start`; the origin is
  // snapped to a multiple of the cell size.
  static OccupancyGrid centered_on(GridConfig cfg, Vec2 start);

  int width() const { return cfg_.width; }
  int height() const { return cfg_.height; }
  double meters_per_cell() const { return cfg_.meters_per_cell; }
  const GridConfig& config() const { return cfg_; }
  Vec2 origin() const { return origin_; }
  Rect world_bounds() const {
    return {origin_.x, origin_.y, cfg_.width * cfg_.meters_per_cell, cfg_.height * cfg_.meters_per_cell};
  }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < cfg_.width && c.y < cfg_.height; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * cfg_.width + c.x; }
  CellState at(Cell c) const { return in_bounds(c) ? cells_[index(c)] : CellState::Unknown; }
  void set(Cell c, CellState s);

  Cell world_to_cell(Vec2 p) const;
  Vec2 cell_center(Cell c) const;

  std::span<const CellState> cells() const { return cells_; }
  std::size_t unknown_count() const { return unknown_count_; }

  // Smallest cell box holding every known cell; nullopt while nothing is known.
  struct CellBox {
    Cell lo, hi;  // inclusive
  };
  std::optional<CellBox> known_box() const;

  std::vector<DetectedObject>& objects() { return objects_; }
  const std::vector<DetectedObject>& objects() const { return objects_; }
  std::vector<Cell>& trajectory() { return trajectory_; }
  const std::vector<Cell>& trajectory() const { return trajectory_; }

  // Known-Free cells as a planning graph.
  SearchGrid free_space() const;

 private:
  GridConfig cfg_;
  Vec2 origin_;
  std::vector<CellState> cells_;
  std::size_t unknown_count_;
  std::optional<CellBox> box_;
  std::vector<DetectedObject> objects_;
  std::vector<Cell> trajectory_;
};

inline constexpr double kObjectDedupRadius = 0.25;  // meters
inline constexpr std::size_t kMinFrontierCells = 3;

// Writes observed cells into the grid (Obstacle wins over Free), logs newly
// seen objects, and appends the pose's cell to the trajectory.
void integrate(OccupancyGrid& grid, const Observation& obs, const Pose& pose, double obs_meters_per_cell,
               int step_index);

std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid);

namespace kernels {

// Per-cell frontier flag (Free and 4-adjacent to Unknown), row-major.
std::vector<std::uint8_t> frontier_mask_serial(const OccupancyGrid& grid);
std::vector<std::uint8_t> frontier_mask_parallel(const OccupancyGrid& grid);

}  // namespace kernels

// Ground-truth navigability as a planning graph.
SearchGrid navigable_space(const Scene& scene);

// Length in meters of an optimal 8-connected path between two points of the
// scene; nullopt when unreachable.
std::optional<double> shortest_path_length(const Scene& scene, Vec2 from, Vec2 to);

// Geodesic distance from `from` to the nearest navigable cell within `radius`
// of any instance of `category`; nullopt when no such cell is reachable.
std::optional<double> shortest_path_to_category(const Scene& scene, Vec2 from, std::string_view category,
                                                double radius);

// Snapshot export: binary PGM (0 obstacle, 128 unknown, 255 free; first row
// is the northernmost) plus a JSON sidecar.
std::string grid_to_pgm(const OccupancyGrid& grid);
std::string grid_sidecar(const OccupancyGrid& grid, int step_index);
OccupancyGrid grid_from_snapshot(std::string_view pgm, std::string_view sidecar);

}  // namespace topv

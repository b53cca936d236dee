#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "topv/avpg.hpp"
#include "topv/raster.hpp"
#include "topv/topmap.hpp"

namespace topv {

enum class DecayMode {
  FractionOfPeak,  // each Gaussian falls to decay_level * peak at its farthest other center
  Absolute,        // each Gaussian falls to the absolute value decay_level there
};

struct FusionConfig {
  double beta = 0.5;          // peak of the target Gaussian
  double decay_level = 0.1;
  double sigma_floor = 1.0;   // meters; used when there is no other center
  DecayMode decay = DecayMode::FractionOfPeak;

  bool operator==(const FusionConfig&) const = default;
};

// Spread that makes a Gaussian of the given peak decay to the configured
// level at the farthest of `others`.
double sigma_for(Vec2 center, std::span<const Vec2> others, const FusionConfig& cfg, double peak = 1.0);

// Unit-peak isotropic Gaussian scaled by `peak`.
struct GaussianTerm {
  Vec2 mean;
  double peak = 0.0;
  double sigma = 1.0;

  double operator()(Vec2 x) const { return peak * std::exp(-(x - mean).squared_norm() / (2.0 * sigma * sigma)); }
};

// One term per marker (peak = its score) plus the target term (peak = beta)
// when a target estimate is given. Spreads are computed against all other
// centers, markers and target alike.
std::vector<GaussianTerm> fusion_terms(std::span<const KeyAreaMarker> markers, std::span<const double> scores,
                                       std::optional<Vec2> target, const FusionConfig& cfg);

// Fused value field sampled at the cell centers of an occupancy grid.
struct ValueMap {
  int width = 0;
  int height = 0;
  Vec2 origin;
  double meters_per_cell = 0.05;
  std::vector<double> values;  // row-major
  std::vector<GaussianTerm> terms;

  double at(Cell c) const { return values[static_cast<std::size_t>(c.y) * width + c.x]; }
  Vec2 cell_center(Cell c) const {
    return {origin.x + (c.x + 0.5) * meters_per_cell, origin.y + (c.y + 0.5) * meters_per_cell};
  }
};

ValueMap fuse(const OccupancyGrid& grid, std::span<const KeyAreaMarker> markers, std::span<const double> scores,
              std::optional<Vec2> target, const FusionConfig& cfg);

namespace kernels {

// Direct per-cell evaluation; the reference the parallel kernel is checked
// against.
void evaluate_terms_serial(std::span<const GaussianTerm> terms, ValueMap& out);
// Separable evaluation (one exp per row and column per term), rows in
// parallel.
void evaluate_terms_parallel(std::span<const GaussianTerm> terms, ValueMap& out);

}  // namespace kernels

class NoFreeCellError : public std::runtime_error {
 public:
  NoFreeCellError() : std::runtime_error("no known-free cell to move to") {}
};

// Row-major mask of cells that must not be chosen (may be empty).
using CellMask = std::vector<std::uint8_t>;

// Highest-valued known-Free cell (not masked); ties go to the lowest
// (row, col). Throws NoFreeCellError when there is none.
Cell select_moving_location(const ValueMap& vmap, const OccupancyGrid& grid, const CellMask& exclude = {});

// Ablation without fusion: the highest-valued candidate among the markers
// (value = score) and the target (value = beta), snapped to the nearest
// known-Free cell. Markers win ties, lower ids first.
Cell select_moving_location_max(std::span<const KeyAreaMarker> markers, std::span<const double> scores,
                                std::optional<Vec2> target, double beta, const OccupancyGrid& grid,
                                const CellMask& exclude = {});

// Heat-map overlay of the value map over the crop window, same raster
// conventions as the prompt map (north up, x to the right).
Image value_map_overlay(const ValueMap& vmap, const OccupancyGrid& grid, const Rect& crop, double pixels_per_meter,
                        std::optional<Vec2> moving_location = std::nullopt);

// Known-Free, unmasked cell nearest to `p`; ties to the lowest (row, col).
Cell nearest_free_cell(const OccupancyGrid& grid, Vec2 p, const CellMask& exclude = {});

}  // namespace topv

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "topv/avpg.hpp"
#include "topv/reasoner.hpp"

namespace topv {

inline constexpr double kMaxScale = 5.0;

struct CropWindow {
  Vec2 center;
  Vec2 half_extent;

  Rect rect() const {
    return {center.x - half_extent.x, center.y - half_extent.y, 2.0 * half_extent.x, 2.0 * half_extent.y};
  }
};

// Largest rectangle centred on `center` (clamped into `map`) that stays inside
// `map`: each half-extent is the distance to the nearer edge on that axis.
CropWindow maximal_crop(const Rect& map, Vec2 center);

// Index of the point nearest to points[i], excluding i itself; ties go to the
// lowest index. nullopt with fewer than two points.
std::optional<std::size_t> nearest_object(std::size_t i, std::span<const Vec2> points);

// 1 / (1 - IoU); +inf at complete overlap.
double scale_from_iou(double iou);

struct ScalingResult {
  std::vector<double> per_object_factors;
  double unclamped = 1.0;  // max of the per-object factors
  double f_scale = 1.0;    // clamped to [1, max_scale]
  // Box pair that produced the maximum (indices into the input).
  std::optional<std::pair<std::size_t, std::size_t>> deciding_pair;
};

// max over boxes of 1 / (1 - IoU), clamped to [1, max_scale].
double combine_scale_factors(std::span<const double> ious, double max_scale = kMaxScale);

// Per box: IoU with the box of the object nearest to its own (by anchor), scale
// 1/(1 - IoU). The final factor is the maximum, clamped to [1, max_scale].
ScalingResult scaling_factor(std::span<const TextBox> boxes, double max_scale = kMaxScale);

struct DmsResult {
  PromptMap map;
  bool applied = false;
  std::optional<Vec2> center;  // world meters, after clamping
  ScalingResult scaling;
  ReasonerAnswer answer;
};

// Asks the reasoner for a region of interest. On decline the input map is
// returned unchanged. Otherwise the maximal crop around the center is zoomed
// by the layout-aware factor and re-rendered on the same raster size, cutting
// off whatever no longer fits around the center.
DmsResult apply_dms(const RenderInput& base, const PromptMap& map, const Reasoner& reasoner,
                    const std::string& target, std::uint64_t episode_seed, double max_scale = kMaxScale);

// The re-render step of apply_dms for a given center and factor.
PromptMap zoom_prompt_map(const RenderInput& base, const PromptMap& map, Vec2 center_world, double f_scale);

}  // namespace topv

#include <algorithm>
#include <cmath>
#include <limits>

#include "topv/dms.hpp"

namespace topv {

CropWindow maximal_crop(const Rect& map, Vec2 center) {
  const Vec2 c{std::clamp(center.x, map.x, map.x1()), std::clamp(center.y, map.y, map.y1())};
  return {c, {std::min(c.x - map.x, map.x1() - c.x), std::min(c.y - map.y, map.y1() - c.y)}};
}

std::optional<std::size_t> nearest_object(std::size_t i, std::span<const Vec2> points) {
  if (points.size() < 2 || i >= points.size()) return std::nullopt;
  std::optional<std::size_t> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k == i) continue;
    const double d2 = (points[k] - points[i]).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

double scale_from_iou(double v) {
  if (v >= 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - v);
}

double combine_scale_factors(std::span<const double> ious, double max_scale) {
  double f = 1.0;
  for (double v : ious) f = std::max(f, scale_from_iou(v));
  return std::min(f, max_scale);
}

ScalingResult scaling_factor(std::span<const TextBox> boxes, double max_scale) {
  ScalingResult r;
  if (boxes.size() < 2) {
    r.per_object_factors.assign(boxes.size(), 1.0);
    return r;
  }
  std::vector<Vec2> anchors;
  anchors.reserve(boxes.size());
  for (const auto& b : boxes) anchors.push_back(b.anchor);
  std::vector<double> ious;
  r.unclamped = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::size_t j = *nearest_object(i, anchors);
    ious.push_back(iou(boxes[i].rect, boxes[j].rect));
    const double f = scale_from_iou(ious.back());
    r.per_object_factors.push_back(f);
    if (f > r.unclamped) {
      r.unclamped = f;
      r.deciding_pair = {i, j};
    }
  }
  r.f_scale = combine_scale_factors(ious, max_scale);
  return r;
}

PromptMap zoom_prompt_map(const RenderInput& base, const PromptMap& map, Vec2 center_world, double f_scale) {
  const CropWindow maximal = maximal_crop(map.transform.crop, center_world);
  const double ppm = map.transform.pixels_per_meter * f_scale;
  // The raster keeps its size; at the new scale it covers this much world.
  const double half_w = map.image.width() / (2.0 * ppm);
  const double half_h = map.map_height_px / (2.0 * ppm);
  const CropWindow crop{maximal.center,
                        {std::min(maximal.half_extent.x, half_w), std::min(maximal.half_extent.y, half_h)}};

  RenderInput in = base;
  in.crop = crop.rect();
  in.pixels_per_meter = ppm;
  PromptMap out = render_prompt_map(in);
  out.scale_factor = map.scale_factor * f_scale;
  return out;
}

DmsResult apply_dms(const RenderInput& base, const PromptMap& map, const Reasoner& reasoner,
                    const std::string& target, std::uint64_t episode_seed, double max_scale) {
  DmsResult r;
  r.map = map;
  ReasonerQuery q{QueryRole::SelectRegion, &map, target, episode_seed};
  r.answer = reasoner.query(q);
  const auto* region = std::get_if<RegionAnswer>(&r.answer.value);
  if (!region || !region->center) return r;

  const Rect& view = map.transform.crop;
  Vec2 c = map.from_frame(*region->center);
  // Keep at least a meter of view around the center so the crop never
  // degenerates to a line at the map edge.
  const double mx = std::min(1.0, view.w / 2.0);
  const double my = std::min(1.0, view.h / 2.0);
  c = {std::clamp(c.x, view.x + mx, view.x1() - mx), std::clamp(c.y, view.y + my, view.y1() - my)};
  const Rect sub = maximal_crop(view, c).rect();

  std::vector<TextBox> inside;
  for (const auto& b : map.textboxes) {
    if (sub.contains_closed(b.object_position)) inside.push_back(b);
  }
  r.scaling = scaling_factor(inside, max_scale);
  r.center = c;
  r.map = zoom_prompt_map(base, map, c, r.scaling.f_scale);
  r.applied = true;
  return r;
}

}  // namespace topv

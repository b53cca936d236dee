#pragma once

#include <span>
#include <string>
#include <vector>

#include "topv/geometry.hpp"
#include "topv/raster.hpp"
#include "topv/topmap.hpp"
#include "topv/worldsim.hpp"

namespace topv {

struct ClusterConfig {
  double epsilon = 1.3;  // meters
  int min_pts = 2;       // neighborhood size, point itself included

  bool operator==(const ClusterConfig&) const = default;
};

struct KeyAreaMarker {
  int id = 0;  // 1-based
  Vec2 centroid;
  std::vector<Vec2> members;
  std::vector<std::size_t> member_indices;  // indices into the clustered point list
  // Filled by label_markers: categories of member objects, and how many
  // members are frontier midpoints.
  std::vector<std::string> object_labels;
  int frontier_members = 0;
};

// Density-based grouping of object positions and frontier midpoints into key
// areas. Border points join the area of their nearest dense point, so the
// result does not depend on input order. Marker ids are assigned by the
// lexicographically smallest member.
std::vector<KeyAreaMarker> cluster_key_areas(std::span<const Vec2> points, const ClusterConfig& cfg = {});

// Merges every group of markers linked by centroids within epsilon (the
// transitive closure of that relation), recomputes each centroid as the
// member mean, and repeats until no two centroids are within epsilon.
// Groups keep the position of their lowest id; ids are renumbered 1..N.
std::vector<KeyAreaMarker> merge_areas(std::vector<KeyAreaMarker> markers, const ClusterConfig& cfg = {});

Vec2 mean_of(std::span<const Vec2> points);

// `labels[i]` is the category of clustered point i, or empty for a frontier
// midpoint.
void label_markers(std::vector<KeyAreaMarker>& markers, std::span<const std::string> labels);

// World <-> pixel mapping of a rendered map. Pixel y grows downwards.
struct PixelTransform {
  Rect crop;  // world rectangle covered by the raster
  double pixels_per_meter = 20.0;

  Vec2 to_pixel(Vec2 world) const {
    return {(world.x - crop.x) * pixels_per_meter, (crop.y1() - world.y) * pixels_per_meter};
  }
  Vec2 to_world(Vec2 pixel) const {
    return {crop.x + pixel.x / pixels_per_meter, crop.y1() - pixel.y / pixels_per_meter};
  }
  int raster_width() const;
  int raster_height() const;
};

inline constexpr int kTextBoxHeight = 12;   // px
inline constexpr int kTextBoxCharWidth = 7;  // px
inline constexpr int kTextBoxPadding = 4;    // px

struct TextBox {
  std::string label;
  Vec2 anchor;  // pixel position of the labelled object
  Rect rect;    // pixel rectangle; bottom-left corner at the anchor
  Vec2 object_position;  // world meters

  Vec2 center() const { return rect.center(); }
};

// One fixed-size box per object. Boxes are never moved apart: their overlap
// is what the map-scaling step measures.
std::vector<TextBox> layout_text_boxes(std::span<const DetectedObject> objects, const PixelTransform& transform);

struct RenderLayers {
  bool history = true;
  bool obstacle = true;
  bool textboxes = true;
  bool coordinate = true;

  bool operator==(const RenderLayers&) const = default;
};

struct LegendEntry {
  std::string text;
  Rgb color;
};

struct FrontierSummary {
  Vec2 midpoint;
  std::size_t size = 0;
};

struct PromptMap {
  Image image;  // map raster followed by the legend strip
  PixelTransform transform;
  Vec2 frame_origin;  // world position of the map coordinate frame's (0, 0)
  int map_height_px = 0;  // rows above the legend strip
  std::vector<TextBox> textboxes;
  std::vector<KeyAreaMarker> markers;  // markers whose centroid is in view
  std::vector<FrontierSummary> frontiers;  // frontiers whose midpoint is in view
  std::vector<LegendEntry> legend;
  Pose agent;
  RenderLayers layers;
  double scale_factor = 1.0;  // relative to the base render

  Vec2 to_frame(Vec2 world) const { return world - frame_origin; }
  Vec2 from_frame(Vec2 frame) const { return frame + frame_origin; }
};

struct RenderInput {
  const OccupancyGrid* grid = nullptr;
  std::span<const KeyAreaMarker> markers;
  std::span<const Frontier> frontiers;
  Pose pose;
  Rect crop;
  double pixels_per_meter = 20.0;
  RenderLayers layers;
};

// Text boxes are laid out from the grid's object log for the objects inside
// the crop window.
PromptMap render_prompt_map(const RenderInput& in);

// Known region of the grid padded by `margin` meters, always holding the
// agent, clamped to the grid.
Rect default_crop(const OccupancyGrid& grid, const Pose& pose, double margin = 1.0);

// Sidecar document (JSON) with the crop window, scale, marker, text-box and
// frontier tables, all in the map coordinate frame.
std::string prompt_sidecar(const PromptMap& map);

namespace palette {
inline constexpr Rgb kUnknown{128, 128, 128};
inline constexpr Rgb kFree{235, 235, 235};
inline constexpr Rgb kObstacle{40, 40, 40};
inline constexpr Rgb kFrontier{0, 170, 220};
inline constexpr Rgb kHistory{40, 90, 230};
inline constexpr Rgb kAgent{20, 160, 20};
inline constexpr Rgb kMarker{220, 30, 30};
inline constexpr Rgb kTextBox{255, 250, 205};
inline constexpr Rgb kInk{0, 0, 0};
inline constexpr Rgb kGridLine{150, 150, 210};
inline constexpr Rgb kGridLabel{0, 0, 128};
inline constexpr Rgb kWhite{255, 255, 255};
}  // namespace palette

}  // namespace topv

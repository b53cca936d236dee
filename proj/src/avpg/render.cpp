#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "topv/avpg.hpp"

namespace topv {

int PixelTransform::raster_width() const {
  return std::max(1, static_cast<int>(std::lround(crop.w * pixels_per_meter)));
}
int PixelTransform::raster_height() const {
  return std::max(1, static_cast<int>(std::lround(crop.h * pixels_per_meter)));
}

std::vector<TextBox> layout_text_boxes(std::span<const DetectedObject> objects, const PixelTransform& transform) {
  std::vector<TextBox> boxes;
  boxes.reserve(objects.size());
  for (const auto& o : objects) {
    TextBox b;
    b.label = o.category;
    b.anchor = transform.to_pixel(o.position);
    b.object_position = o.position;
    const double w = kTextBoxCharWidth * static_cast<double>(o.category.size()) + kTextBoxPadding;
    b.rect = {b.anchor.x, b.anchor.y - kTextBoxHeight, w, static_cast<double>(kTextBoxHeight)};
    boxes.push_back(std::move(b));
  }
  return boxes;
}

Rect default_crop(const OccupancyGrid& grid, const Pose& pose, double margin) {
  const Rect gb = grid.world_bounds();
  double x0 = pose.x, y0 = pose.y, x1 = pose.x, y1 = pose.y;
  if (auto box = grid.known_box()) {
    const double res = grid.meters_per_cell();
    x0 = std::min(x0, grid.origin().x + box->lo.x * res);
    y0 = std::min(y0, grid.origin().y + box->lo.y * res);
    x1 = std::max(x1, grid.origin().x + (box->hi.x + 1) * res);
    y1 = std::max(y1, grid.origin().y + (box->hi.y + 1) * res);
  }
  x0 = std::max(gb.x, x0 - margin);
  y0 = std::max(gb.y, y0 - margin);
  x1 = std::min(gb.x1(), x1 + margin);
  y1 = std::min(gb.y1(), y1 + margin);
  return {x0, y0, x1 - x0, y1 - y0};
}

namespace {

std::string format_meters(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const std::vector<LegendEntry>& legend_entries() {
  static const std::vector<LegendEntry> kLegend{
      {"free", palette::kFree},         {"obstacle", palette::kObstacle}, {"unknown", palette::kUnknown},
      {"frontier", palette::kFrontier}, {"history", palette::kHistory},   {"agent", palette::kAgent},
      {"marker", palette::kMarker},     {"object", palette::kTextBox},
  };
  return kLegend;
}

// Lays the legend out in rows that fit the raster width; returns the strip
// height needed.
int legend_height(int width) {
  constexpr int kRow = 12;
  int x = 2, rows = 1;
  for (const auto& e : legend_entries()) {
    const int w = 10 + Image::kGlyphAdvance * static_cast<int>(e.text.size()) + 6;
    if (x + w > width && x > 2) {
      x = 2;
      ++rows;
    }
    x += w;
  }
  return rows * kRow + 2;
}

void draw_legend(Image& img, int top) {
  constexpr int kRow = 12;
  img.fill_rect(0, top, img.width(), img.height() - top, palette::kWhite);
  int x = 2, y = top + 2;
  for (const auto& e : legend_entries()) {
    const int w = 10 + Image::kGlyphAdvance * static_cast<int>(e.text.size()) + 6;
    if (x + w > img.width() && x > 2) {
      x = 2;
      y += kRow;
    }
    img.fill_rect(x, y + 1, 8, 8, e.color);
    img.stroke_rect(x, y + 1, 8, 8, palette::kInk);
    img.text(x + 10, y + 2, e.text, palette::kInk);
    x += w;
  }
}

}  // namespace

PromptMap render_prompt_map(const RenderInput& in) {
  const OccupancyGrid& grid = *in.grid;
  PromptMap out;
  out.transform = {in.crop, in.pixels_per_meter};
  out.frame_origin = grid.origin();
  out.agent = in.pose;
  out.layers = in.layers;
  out.legend = legend_entries();
  const auto& tf = out.transform;
  const int w = tf.raster_width();
  const int h = tf.raster_height();
  out.map_height_px = h;
  out.image = Image(w, h + legend_height(w), palette::kUnknown);
  Image& img = out.image;

  // Occupancy layer.
  const bool show_obstacles = in.layers.obstacle;
#pragma omp parallel for schedule(static)
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const Vec2 p = tf.to_world({px + 0.5, py + 0.5});
      switch (grid.at(grid.world_to_cell(p))) {
        case CellState::Free: img.set(px, py, palette::kFree); break;
        case CellState::Obstacle:
          img.set(px, py, show_obstacles ? palette::kObstacle : palette::kUnknown);
          break;
        case CellState::Unknown: break;
      }
    }
  }

  const double res = grid.meters_per_cell();
  auto fill_cell = [&](Cell c, Rgb color) {
    const Vec2 lo = tf.to_pixel(grid.cell_center(c) + Vec2{-res / 2, res / 2});
    const Vec2 hi = tf.to_pixel(grid.cell_center(c) + Vec2{res / 2, -res / 2});
    const int x0 = static_cast<int>(std::floor(lo.x)), y0 = static_cast<int>(std::floor(lo.y));
    const int x1 = std::max(x0 + 1, static_cast<int>(std::ceil(hi.x)));
    const int y1 = std::max(y0 + 1, static_cast<int>(std::ceil(hi.y)));
    img.fill_rect(x0, y0, x1 - x0, y1 - y0, color);
  };

  for (const auto& f : in.frontiers) {
    for (const auto c : f.cells) fill_cell(c, palette::kFrontier);
    if (in.crop.contains(f.midpoint)) out.frontiers.push_back({f.midpoint, f.cells.size()});
  }

  if (in.layers.coordinate) {
    const double step = in.pixels_per_meter >= 20.0 ? 1.0 : (in.pixels_per_meter >= 8.0 ? 2.0 : 5.0);
    const double fx0 = std::ceil((in.crop.x - grid.origin().x) / step) * step;
    for (double fx = fx0; grid.origin().x + fx <= in.crop.x1(); fx += step) {
      const int px = static_cast<int>(std::lround(tf.to_pixel({grid.origin().x + fx, 0.0}).x));
      for (int py = 0; py < h; ++py) img.blend(px, py, palette::kGridLine, 0.6);
      img.text(px + 2, 2, format_meters(fx), palette::kGridLabel);
    }
    const double fy0 = std::ceil((in.crop.y - grid.origin().y) / step) * step;
    for (double fy = fy0; grid.origin().y + fy <= in.crop.y1(); fy += step) {
      const int py = static_cast<int>(std::lround(tf.to_pixel({0.0, grid.origin().y + fy}).y));
      for (int px = 0; px < w; ++px) img.blend(px, py, palette::kGridLine, 0.6);
      img.text(2, py - Image::kGlyphHeight - 1, format_meters(fy), palette::kGridLabel);
    }
  }

  if (in.layers.history) {
    const auto& traj = grid.trajectory();
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (traj[i] == traj[i - 1]) continue;
      const Vec2 a = tf.to_pixel(grid.cell_center(traj[i - 1]));
      const Vec2 b = tf.to_pixel(grid.cell_center(traj[i]));
      img.line(static_cast<int>(a.x), static_cast<int>(a.y), static_cast<int>(b.x), static_cast<int>(b.y),
               palette::kHistory);
    }
  }

  if (in.layers.textboxes) {
    std::vector<DetectedObject> in_view;
    for (const auto& o : grid.objects()) {
      if (in.crop.contains(o.position)) in_view.push_back(o);
    }
    out.textboxes = layout_text_boxes(in_view, tf);
    for (const auto& b : out.textboxes) {
      const int x = static_cast<int>(std::floor(b.rect.x));
      const int y = static_cast<int>(std::floor(b.rect.y));
      img.fill_rect(x, y, static_cast<int>(b.rect.w), kTextBoxHeight, palette::kTextBox);
      img.stroke_rect(x, y, static_cast<int>(b.rect.w), kTextBoxHeight, palette::kInk);
      img.text(x + kTextBoxPadding / 2, y + (kTextBoxHeight - Image::kGlyphHeight) / 2, b.label, palette::kInk);
    }
  }

  for (const auto& m : in.markers) {
    if (!in.crop.contains(m.centroid)) continue;
    out.markers.push_back(m);
    const Vec2 p = tf.to_pixel(m.centroid);
    const int cx = static_cast<int>(std::lround(p.x));
    const int cy = static_cast<int>(std::lround(p.y));
    const std::string id = std::to_string(m.id);
    img.disc(cx, cy, 7, palette::kMarker);
    img.text(cx - (Image::kGlyphAdvance * static_cast<int>(id.size()) - 2) / 2, cy - 3, id, palette::kWhite);
  }

  {
    const Vec2 p = tf.to_pixel(in.pose.position());
    const int cx = static_cast<int>(std::lround(p.x));
    const int cy = static_cast<int>(std::lround(p.y));
    img.disc(cx, cy, 4, palette::kAgent);
    const int hx = cx + static_cast<int>(std::lround(10.0 * std::cos(in.pose.heading)));
    const int hy = cy - static_cast<int>(std::lround(10.0 * std::sin(in.pose.heading)));
    img.line(cx, cy, hx, hy, palette::kAgent);
  }

  draw_legend(img, h);
  return out;
}

std::string prompt_sidecar(const PromptMap& map) {
  using nlohmann::json;
  auto pt = [&](Vec2 world) {
    const Vec2 f = map.to_frame(world);
    return json::array({f.x, f.y});
  };
  const Rect& c = map.transform.crop;
  const Vec2 lo = map.to_frame({c.x, c.y});
  json j;
  j["frame"] = {{"origin_world", {map.frame_origin.x, map.frame_origin.y}},
                {"units", "meters"},
                {"axes", "x to the right, y up; labels on the grid lines"}};
  j["crop_window"] = {lo.x, lo.y, c.w, c.h};
  j["pixels_per_meter"] = map.transform.pixels_per_meter;
  j["scale_factor"] = map.scale_factor;
  j["image_size"] = {map.image.width(), map.map_height_px};
  j["agent"] = {{"position", pt(map.agent.position())}, {"heading_deg", rad_to_deg(map.agent.heading)}};
  j["markers"] = json::array();
  for (const auto& m : map.markers) {
    j["markers"].push_back({{"id", m.id},
                            {"position", pt(m.centroid)},
                            {"objects", m.object_labels},
                            {"frontier_points", m.frontier_members}});
  }
  j["textboxes"] = json::array();
  for (const auto& b : map.textboxes) {
    j["textboxes"].push_back(
        {{"label", b.label}, {"position", pt(b.object_position)}, {"rect", {b.rect.x, b.rect.y, b.rect.w, b.rect.h}}});
  }
  j["frontiers"] = json::array();
  for (const auto& f : map.frontiers) j["frontiers"].push_back({{"midpoint", pt(f.midpoint)}, {"cells", f.size}});
  j["layers"] = {{"history", map.layers.history},
                 {"obstacle", map.layers.obstacle},
                 {"textboxes", map.layers.textboxes},
                 {"coordinate", map.layers.coordinate}};
  return j.dump(2);
}

}  // namespace topv

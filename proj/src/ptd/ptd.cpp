#include <algorithm>
#include <cmath>
#include <limits>

#include "topv/ptd.hpp"

namespace topv {

double sigma_for(Vec2 center, std::span<const Vec2> others, const FusionConfig& cfg, double peak) {
  double d2 = 0.0;
  for (const Vec2& o : others) d2 = std::max(d2, (o - center).squared_norm());
  if (d2 == 0.0) return cfg.sigma_floor;
  const double ratio = cfg.decay == DecayMode::FractionOfPeak ? 1.0 / cfg.decay_level : peak / cfg.decay_level;
  // An absolute level at or above the peak is never reached.
  if (ratio <= 1.0) return cfg.sigma_floor;
  return std::sqrt(d2) / std::sqrt(2.0 * std::log(ratio));
}

std::vector<GaussianTerm> fusion_terms(std::span<const KeyAreaMarker> markers, std::span<const double> scores,
                                       std::optional<Vec2> target, const FusionConfig& cfg) {
  std::vector<Vec2> centers;
  std::vector<double> peaks;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    centers.push_back(markers[i].centroid);
    peaks.push_back(i < scores.size() ? std::clamp(scores[i], 0.0, 1.0) : 0.5);
  }
  if (target) {
    centers.push_back(*target);
    peaks.push_back(cfg.beta);
  }

  std::vector<GaussianTerm> terms;
  std::vector<Vec2> others;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    others.clear();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (k != i) others.push_back(centers[k]);
    }
    terms.push_back({centers[i], peaks[i], sigma_for(centers[i], others, cfg, peaks[i])});
  }
  return terms;
}

namespace kernels {

void evaluate_terms_serial(std::span<const GaussianTerm> terms, ValueMap& out) {
  out.values.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const Vec2 p = out.cell_center({x, y});
      double v = 0.0;
      for (const auto& t : terms) v += t(p);
      out.values[static_cast<std::size_t>(y) * out.width + x] = v;
    }
  }
}

void evaluate_terms_parallel(std::span<const GaussianTerm> terms, ValueMap& out) {
  const int w = out.width;
  const int h = out.height;
  const std::size_t nt = terms.size();
  // ex[t][x] = exp(-(cx - mx)^2 / 2s^2), ey likewise, peak folded into ey.
  std::vector<double> ex(nt * w), ey(nt * h);
  for (std::size_t t = 0; t < nt; ++t) {
    const double k = 1.0 / (2.0 * terms[t].sigma * terms[t].sigma);
    for (int x = 0; x < w; ++x) {
      const double d = out.origin.x + (x + 0.5) * out.meters_per_cell - terms[t].mean.x;
      ex[t * w + x] = std::exp(-d * d * k);
    }
    for (int y = 0; y < h; ++y) {
      const double d = out.origin.y + (y + 0.5) * out.meters_per_cell - terms[t].mean.y;
      ey[t * h + y] = terms[t].peak * std::exp(-d * d * k);
    }
  }
  out.values.assign(static_cast<std::size_t>(w) * h, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double* row = out.values.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t t = 0; t < nt; ++t) {
      const double fy = ey[t * h + y];
      if (fy == 0.0) continue;
      const double* fx = ex.data() + t * w;
      for (int x = 0; x < w; ++x) row[x] += fy * fx[x];
    }
  }
}

}  // namespace kernels

ValueMap fuse(const OccupancyGrid& grid, std::span<const KeyAreaMarker> markers, std::span<const double> scores,
              std::optional<Vec2> target, const FusionConfig& cfg) {
  ValueMap v;
  v.width = grid.width();
  v.height = grid.height();
  v.origin = grid.origin();
  v.meters_per_cell = grid.meters_per_cell();
  v.terms = fusion_terms(markers, scores, target, cfg);
  kernels::evaluate_terms_parallel(v.terms, v);
  return v;
}

namespace {

bool selectable(const OccupancyGrid& grid, const CellMask& exclude, Cell c) {
  if (grid.at(c) != CellState::Free) return false;
  return exclude.empty() || exclude[grid.index(c)] == 0;
}

}  // namespace

Cell select_moving_location(const ValueMap& vmap, const OccupancyGrid& grid, const CellMask& exclude) {
  const auto box = grid.known_box();
  if (!box) throw NoFreeCellError();
  std::optional<Cell> best;
  double best_v = -std::numeric_limits<double>::infinity();
  // Row-major scan with strict improvement keeps the lowest (row, col) on ties.
  for (int y = box->lo.y; y <= box->hi.y; ++y) {
    for (int x = box->lo.x; x <= box->hi.x; ++x) {
      const Cell c{x, y};
      if (!selectable(grid, exclude, c)) continue;
      const double v = vmap.at(c);
      if (!best || v > best_v) {
        best = c;
        best_v = v;
      }
    }
  }
  if (!best) throw NoFreeCellError();
  return *best;
}

Cell nearest_free_cell(const OccupancyGrid& grid, Vec2 p, const CellMask& exclude) {
  const auto box = grid.known_box();
  if (!box) throw NoFreeCellError();
  std::optional<Cell> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int y = box->lo.y; y <= box->hi.y; ++y) {
    for (int x = box->lo.x; x <= box->hi.x; ++x) {
      const Cell c{x, y};
      if (!selectable(grid, exclude, c)) continue;
      const double d2 = (grid.cell_center(c) - p).squared_norm();
      if (d2 < best_d2) {
        best = c;
        best_d2 = d2;
      }
    }
  }
  if (!best) throw NoFreeCellError();
  return *best;
}

Cell select_moving_location_max(std::span<const KeyAreaMarker> markers, std::span<const double> scores,
                                std::optional<Vec2> target, double beta, const OccupancyGrid& grid,
                                const CellMask& exclude) {
  std::optional<Vec2> best;
  double best_v = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(markers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return markers[a].id < markers[b].id; });
  for (std::size_t i : order) {
    const double v = i < scores.size() ? scores[i] : 0.5;
    if (v > best_v) {
      best_v = v;
      best = markers[i].centroid;
    }
  }
  if (target && beta > best_v) best = *target;
  if (!best) return nearest_free_cell(grid, grid.trajectory().empty() ? grid.world_bounds().center()
                                                                      : grid.cell_center(grid.trajectory().back()),
                                      exclude);
  return nearest_free_cell(grid, *best, exclude);
}

namespace {

Rgb heat(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // Dark blue -> cyan -> yellow -> red.
  const double r = std::clamp(1.5 * t * 2.0 - 1.0, 0.0, 1.0);
  const double g = t < 0.75 ? std::clamp(2.0 * t, 0.0, 1.0) : std::clamp(4.0 * (1.0 - t), 0.0, 1.0);
  const double b = std::clamp(1.0 - 2.0 * t, 0.0, 1.0) * 0.8 + 0.2 * (1.0 - t);
  return {static_cast<std::uint8_t>(std::lround(255 * r)), static_cast<std::uint8_t>(std::lround(255 * g)),
          static_cast<std::uint8_t>(std::lround(255 * b))};
}

}  // namespace

Image value_map_overlay(const ValueMap& vmap, const OccupancyGrid& grid, const Rect& crop, double pixels_per_meter,
                        std::optional<Vec2> moving_location) {
  const PixelTransform tf{crop, pixels_per_meter};
  const int w = tf.raster_width();
  const int h = tf.raster_height();
  Image img(w, h, palette::kUnknown);

  std::vector<Cell> cells(static_cast<std::size_t>(w) * h);
  double vmax = 0.0;
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const Cell c = grid.world_to_cell(tf.to_world({px + 0.5, py + 0.5}));
      cells[static_cast<std::size_t>(py) * w + px] = c;
      if (grid.in_bounds(c)) vmax = std::max(vmax, vmap.at(c));
    }
  }
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const Cell c = cells[static_cast<std::size_t>(py) * w + px];
      if (!grid.in_bounds(c)) continue;
      const Rgb col = heat(vmax > 0.0 ? vmap.at(c) / vmax : 0.0);
      switch (grid.at(c)) {
        case CellState::Free: img.set(px, py, col); break;
        case CellState::Unknown:
          img.set(px, py, palette::kUnknown);
          img.blend(px, py, col, 0.35);
          break;
        case CellState::Obstacle: img.set(px, py, palette::kObstacle); break;
      }
    }
  }
  if (moving_location) {
    const Vec2 p = tf.to_pixel(*moving_location);
    const int x = static_cast<int>(std::floor(p.x));
    const int y = static_cast<int>(std::floor(p.y));
    img.line(x - 6, y, x + 6, y, palette::kWhite);
    img.line(x, y - 6, x, y + 6, palette::kWhite);
  }
  return img;
}

}  // namespace topv

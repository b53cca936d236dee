#include <algorithm>
#include <cmath>
#include <random>

#include "topv/harness.hpp"
#include "topv/search.hpp"
#include "topv/topmap.hpp"

namespace topv {

namespace {

struct Furniture {
  std::string_view category;
  double w, h;
  bool required;
};

struct RoomType {
  std::string_view name;
  std::vector<Furniture> items;
};

const std::vector<RoomType>& room_types() {
  static const std::vector<RoomType> kTypes{
      {"bedroom",
       {{"bed", 1.0, 1.6, true}, {"nightstand", 0.4, 0.4, false}, {"wardrobe", 0.5, 1.0, false},
        {"dresser", 0.4, 0.8, false}}},
      {"bathroom", {{"toilet", 0.4, 0.6, true}, {"sink", 0.4, 0.5, false}, {"bathtub", 0.7, 1.5, false}}},
      {"living_room",
       {{"sofa", 0.8, 1.8, true}, {"tv_monitor", 0.3, 1.0, true}, {"coffee_table", 0.5, 0.9, false},
        {"armchair", 0.7, 0.7, false}, {"plant", 0.4, 0.4, false}}},
      {"dining_room",
       {{"chair", 0.45, 0.45, true}, {"dining_table", 0.9, 1.4, false}, {"cabinet", 0.4, 0.9, false},
        {"chair", 0.45, 0.45, false}}},
      {"office",
       {{"plant", 0.4, 0.4, true}, {"desk", 0.6, 1.2, false}, {"bookshelf", 0.3, 0.9, false},
        {"chair", 0.45, 0.45, false}}},
      {"kitchen", {{"refrigerator", 0.6, 0.6, true}, {"stove", 0.6, 0.6, false}, {"counter", 0.6, 1.2, false}}},
  };
  return kTypes;
}

Rect inflate(const Rect& r, double m) { return {r.x - m, r.y - m, r.w + 2 * m, r.h + 2 * m}; }

bool overlaps(const Rect& a, const Rect& b) { return a.x < b.x1() && b.x < a.x1() && a.y < b.y1() && b.y < a.y1(); }

// [lo, hi) minus the given gaps, as pieces.
std::vector<std::pair<double, double>> subtract(double lo, double hi, std::vector<std::pair<double, double>> gaps) {
  std::sort(gaps.begin(), gaps.end());
  std::vector<std::pair<double, double>> out;
  double at = lo;
  for (const auto& [a, b] : gaps) {
    if (a > at) out.emplace_back(at, a);
    at = std::max(at, b);
  }
  if (at < hi) out.emplace_back(at, hi);
  return out;
}

constexpr double kMaxSide = 24.0;  // keeps any start within half a default map of every wall
constexpr double kObjectGap = 0.55;
constexpr double kDoorKeepout = 0.7;
constexpr double kViewRadius = 0.9;

bool scene_fits_objects(const Scene& scene, const std::vector<std::int64_t>& field, std::size_t index) {
  const auto& o = scene.objects()[index];
  const Cell lo = scene.cell_of(o.position - Vec2{kViewRadius, kViewRadius});
  const Cell hi = scene.cell_of(o.position + Vec2{kViewRadius, kViewRadius});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      const Cell c{x, y};
      if (!scene.in_bounds(c) || field[static_cast<std::size_t>(y) * scene.cols() + x] == kUnreachable) continue;
      const Vec2 p = scene.cell_center(c);
      if (distance(p, o.position) > kViewRadius) continue;
      const Vec2 d = o.position - p;
      const Pose pose{p.x, p.y, wrap_angle_positive(std::atan2(d.y, d.x)), 0.0};
      if (object_visible(scene, pose, index)) return true;
    }
  }
  return false;
}

}  // namespace

bool clear_around(const Scene& scene, Vec2 p, double radius) {
  const Cell lo = scene.cell_of(p - Vec2{radius, radius});
  const Cell hi = scene.cell_of(p + Vec2{radius, radius});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      if (distance(scene.cell_center({x, y}), p) <= radius && !scene.navigable(Cell{x, y})) return false;
    }
  }
  return true;
}

GeneratedScene generate_scene(std::uint64_t seed, const SceneSpec& spec) {
  if (spec.rooms < 1) throw SceneError("scene spec: at least one room is required");
  if (!(spec.room_min > 0.0) || spec.room_min > spec.room_max) throw SceneError("scene spec: bad room size range");
  if (!(spec.wall_thickness > 0.0) || !(spec.door_width > 0.0)) throw SceneError("scene spec: bad wall or door size");
  if (spec.door_width + 0.6 > spec.room_min) throw SceneError("scene spec: rooms too small for a door");
  if (spec.objects_per_room < 0) throw SceneError("scene spec: negative object count");

  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const int n = spec.rooms;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  const double t = spec.wall_thickness;
  std::vector<double> widths(cols), heights(rows);
  for (auto& w : widths) w = uniform(spec.room_min, spec.room_max);
  for (auto& h : heights) h = uniform(spec.room_min, spec.room_max);
  std::vector<double> xs(cols + 1), ys(rows + 1);
  xs[0] = ys[0] = t;
  for (int j = 0; j < cols; ++j) xs[j + 1] = xs[j] + widths[j] + t;
  for (int i = 0; i < rows; ++i) ys[i + 1] = ys[i] + heights[i] + t;
  const double width = xs[cols];
  const double height = ys[rows];
  if (width > kMaxSide || height > kMaxSide) throw SceneError("scene spec: layout exceeds the map size");

  GeneratedScene g;
  g.data.width = width;
  g.data.height = height;

  std::vector<std::string_view> types;
  {
    std::vector<std::string_view> core{"bedroom", "bathroom", "living_room", "dining_room", "office"};
    std::shuffle(core.begin(), core.end(), rng);
    core.push_back("kitchen");
    for (int k = 0; k < n; ++k) types.push_back(core[k % core.size()]);
  }
  for (int k = 0; k < n; ++k) {
    const int i = k / cols, j = k % cols;
    g.rooms.push_back({{xs[j], ys[i], widths[j], heights[i]}, std::string(types[k])});
  }

  // Random spanning tree over neighbouring rooms, then a few extra doors.
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k < n; ++k) {
    if (k % cols + 1 < cols && k + 1 < n) edges.emplace_back(k, k + 1);
    if (k + cols < n) edges.emplace_back(k, k + cols);
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<int> parent(n);
  for (int k = 0; k < n; ++k) parent[k] = k;
  auto find = [&](int k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  std::vector<std::pair<int, int>> chosen, spare;
  for (const auto& e : edges) {
    const int a = find(e.first), b = find(e.second);
    if (a != b) {
      parent[a] = b;
      chosen.push_back(e);
    } else {
      spare.push_back(e);
    }
  }
  for (int k = 0; k < spec.extra_doors && k < static_cast<int>(spare.size()); ++k) chosen.push_back(spare[k]);
  std::sort(chosen.begin(), chosen.end());

  const double margin = 0.3;
  for (const auto& [a, b] : chosen) {
    const Rect& ra = g.rooms[a].interior;
    Door d{a, b, {}};
    if (b == a + 1) {
      const double y0 = uniform(ra.y + margin, ra.y1() - margin - spec.door_width);
      d.gap = {ra.x1(), y0, t, spec.door_width};
    } else {
      const double x0 = uniform(ra.x + margin, ra.x1() - margin - spec.door_width);
      d.gap = {x0, ra.y1(), spec.door_width, t};
    }
    g.doors.push_back(d);
  }

  // Walls: outline, separators with the door gaps cut out, solid unused slots.
  auto& walls = g.data.walls;
  walls.push_back({0.0, 0.0, width, t});
  walls.push_back({0.0, height - t, width, t});
  walls.push_back({0.0, 0.0, t, height});
  walls.push_back({width - t, 0.0, t, height});
  for (int j = 1; j < cols; ++j) {
    std::vector<std::pair<double, double>> gaps;
    for (const auto& d : g.doors) {
      if (d.b == d.a + 1 && std::abs(d.gap.x - (xs[j] - t)) < 1e-9) gaps.emplace_back(d.gap.y, d.gap.y1());
    }
    for (const auto& [lo, hi] : subtract(t, height - t, gaps)) walls.push_back({xs[j] - t, lo, t, hi - lo});
  }
  for (int i = 1; i < rows; ++i) {
    std::vector<std::pair<double, double>> gaps;
    for (const auto& d : g.doors) {
      if (d.b != d.a + 1 && std::abs(d.gap.y - (ys[i] - t)) < 1e-9) gaps.emplace_back(d.gap.x, d.gap.x1());
    }
    for (const auto& [lo, hi] : subtract(t, width - t, gaps)) walls.push_back({lo, ys[i] - t, hi - lo, t});
  }
  for (int k = n; k < rows * cols; ++k) {
    const int i = k / cols, j = k % cols;
    walls.push_back({xs[j], ys[i], widths[j], heights[i]});
  }

  // Furniture.
  for (int k = 0; k < n; ++k) {
    const Rect& room = g.rooms[k].interior;
    const auto& type = *std::find_if(room_types().begin(), room_types().end(),
                                     [&](const RoomType& rt) { return rt.name == g.rooms[k].type; });
    std::vector<Furniture> picks;
    std::vector<Furniture> optional;
    for (const auto& f : type.items) (f.required ? picks : optional).push_back(f);
    std::shuffle(optional.begin(), optional.end(), rng);
    for (const auto& f : optional) {
      if (static_cast<int>(picks.size()) >= spec.objects_per_room) break;
      picks.push_back(f);
    }
    for (const auto& f : picks) {
      for (int attempt = 0; attempt < 60; ++attempt) {
        const bool rotate = uniform(0.0, 1.0) < 0.5;
        const double w = rotate ? f.h : f.w;
        const double h = rotate ? f.w : f.h;
        if (w + 0.3 > room.w || h + 0.3 > room.h) continue;
        const double cx = uniform(room.x + 0.15 + w / 2, room.x1() - 0.15 - w / 2);
        const double cy = uniform(room.y + 0.15 + h / 2, room.y1() - 0.15 - h / 2);
        const Rect fp{cx - w / 2, cy - h / 2, w, h};
        const bool blocked =
            std::any_of(g.data.objects.begin(), g.data.objects.end(),
                        [&](const PlacedObject& o) { return overlaps(inflate(fp, kObjectGap), o.footprint); }) ||
            std::any_of(g.doors.begin(), g.doors.end(),
                        [&](const Door& d) { return overlaps(inflate(fp, kDoorKeepout), d.gap); });
        if (blocked) continue;
        g.data.objects.push_back({std::string(f.category), {cx, cy}, fp});
        break;
      }
    }
  }

  // Start: a point with some clearance whose free region is most of the
  // apartment; then drop objects that cannot be reached and seen.
  const double res = 0.05;
  {
    SceneData bare = g.data;
    bare.start.reset();
    const Scene scene(bare, res);
    const auto nav = navigable_space(scene);
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Rect& room = g.rooms[static_cast<std::size_t>(rng() % n)].interior;
      const Vec2 p{uniform(room.x + 0.5, room.x1() - 0.5), uniform(room.y + 0.5, room.y1() - 0.5)};
      const double heading = std::floor(uniform(0.0, 12.0)) * 30.0;
      if (!clear_around(scene, p, 0.3)) continue;
      const auto field = cost_field(nav, {scene.cell_of(p)});
      const auto reached = static_cast<std::size_t>(
          std::count_if(field.begin(), field.end(), [](std::int64_t v) { return v != kUnreachable; }));
      if (2 * reached < scene.navigable_count()) continue;
      g.data.start = StartPose{p, heading};
      break;
    }
  }
  if (!g.data.start) throw SceneError("scene generation: no usable start position");

  for (bool changed = true; changed;) {
    changed = false;
    const Scene scene(g.data, res);
    const auto field = cost_field(navigable_space(scene), {scene.cell_of(g.data.start->position)});
    for (std::size_t i = 0; i < scene.objects().size(); ++i) {
      if (!scene_fits_objects(scene, field, i)) {
        g.data.objects.erase(g.data.objects.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }

  for (const auto cat : kTargetCategories) {
    if (std::any_of(g.data.objects.begin(), g.data.objects.end(),
                    [&](const PlacedObject& o) { return o.category == cat; })) {
      g.data.targets.emplace_back(cat);
    }
  }
  return g;
}

}  // namespace topv

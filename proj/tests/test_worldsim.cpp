#include <random>
#include <set>

#include <doctest.h>

#include "topv/harness.hpp"
#include "topv/worldsim.hpp"

using namespace topv;

namespace {

SceneData open_room() {
  SceneData d;
  d.width = 10.0;
  d.height = 10.0;
  d.objects.push_back({"bed", {5.0, 5.0}, {4.6, 4.6, 0.8, 0.8}});
  return d;
}

// Segment hits the open interior of the square cell? Exact slab clipping.
bool segment_crosses_cell(Vec2 a, Vec2 b, double x0, double y0, double s) {
  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p[2] = {a.x, a.y};
  const double lo[2] = {x0, y0};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p[k] <= lo[k] || p[k] >= lo[k] + s) return false;
      continue;
    }
    double ta = (lo[k] - p[k]) / d[k], tb = (lo[k] + s - p[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 - t0 > 1e-12;
}

// Sight line by exact clipping against every blocking cell near the segment.
bool visible_oracle(const Scene& scene, const Pose& pose, std::size_t k, const SimConfig& cfg) {
  const auto& o = scene.objects()[k];
  const Vec2 a = pose.position();
  if (distance(a, o.position) > cfg.max_range) return false;
  const double bearing = std::atan2(o.position.y - a.y, o.position.x - a.x);
  if (std::abs(wrap_angle_signed(bearing - pose.heading)) > deg_to_rad(cfg.fov_deg) / 2.0 + 1e-12) return false;
  const double r = scene.meters_per_cell();
  const Cell lo = scene.cell_of({std::min(a.x, o.position.x), std::min(a.y, o.position.y)});
  const Cell hi = scene.cell_of({std::max(a.x, o.position.x), std::max(a.y, o.position.y)});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      const auto l = scene.label({x, y});
      if (l == Scene::kFree || l == static_cast<std::int32_t>(k) + 2) continue;
      if (segment_crosses_cell(a, o.position, x * r, y * r, r)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("minimal scene document loads") {
  const Scene s = load_scene(R"({"bounds": [10, 10], "walls": [],
    "objects": [{"category": "bed", "position": [5, 5], "footprint": [4.5, 4.5, 1, 1]}]})");
  CHECK(s.objects().size() == 1);
  CHECK(s.cols() == 200);
}

TEST_CASE("object outside bounds is rejected") {
  CHECK_THROWS_AS(load_scene(R"({"bounds": [10, 10],
    "objects": [{"category": "bed", "position": [20, 20], "footprint": [19.5, 19.5, 1, 1]}]})"),
                  SceneError);
}

TEST_CASE("schema errors carry the field path") {
  try {
    load_scene(R"({"bounds": [10, 10], "walls": [{"rect": [1, 2, 3]}]})");
    FAIL("expected SceneError");
  } catch (const SceneError& e) {
    CHECK(std::string(e.what()).find("walls[0].rect") != std::string::npos);
  }
}

TEST_CASE("serialize / load round trip on generated scenes") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto g = generate_scene(seed);
    const Scene back = load_scene(serialize_scene(g.data));
    REQUIRE(back.data() == g.data);
  }
}

TEST_CASE("step kinematics") {
  SceneData d = open_room();
  d.walls.push_back({5.2, 0.0, 0.2, 4.0});
  const Scene s(d);
  const Pose p{5.0, 2.0, 0.0, 0.0};
  CHECK(step(s, p, Action::MoveForward) == p);

  const Pose open{5.0, 7.0, 0.0, 0.0};
  const Pose f = step(s, open, Action::MoveForward);
  CHECK(f.x == doctest::Approx(5.25).epsilon(1e-12));
  CHECK(f.y == doctest::Approx(7.0));

  Pose q = open;
  for (int i = 0; i < 12; ++i) q = step(s, q, Action::TurnLeft);
  CHECK(q.heading == 0.0);
  CHECK(step(s, open, Action::LookUp).tilt > 0.0);
  CHECK(step(s, open, Action::LookUp).position() == open.position());
  CHECK(step(s, open, Action::Stop) == open);
}

TEST_CASE("observe stops at a wall") {
  SceneData d;
  d.width = 10.0;
  d.height = 3.0;
  d.walls.push_back({3.0, 0.0, 0.5, 3.0});
  const Scene s(d);
  const Pose p{2.0, 1.5, 0.0, 0.0};
  const auto obs = observe(s, p);
  std::set<Cell> free(obs.free_cells.begin(), obs.free_cells.end());
  for (const auto& c : obs.free_cells) CHECK(s.cell_center(c).x < 3.0);
  for (const auto& c : obs.obstacle_cells) {
    if (s.in_bounds(c)) CHECK(s.label(c) != Scene::kFree);
    CHECK(free.count(c) == 0);
  }
  CHECK(free.count(s.cell_of(p.position())) == 1);
  CHECK(std::any_of(obs.obstacle_cells.begin(), obs.obstacle_cells.end(),
                    [&](Cell c) { return s.cell_center(c).x > 3.0 && s.cell_center(c).x < 3.1; }));
}

TEST_CASE("object behind the agent is not visible") {
  const Scene s(open_room());
  const Pose p{7.0, 5.0, 0.0, 0.0};
  CHECK(observe(s, p).visible_objects.empty());
  const Pose facing{7.0, 5.0, std::numbers::pi, 0.0};
  CHECK(observe(s, facing).visible_objects.size() == 1);
}

TEST_CASE("object visibility matches exact sight-line clipping") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 100; ++seed) {
    const Scene s(generate_scene(seed).data);
    std::uniform_real_distribution<double> ux(0.0, s.bounds().w), uy(0.0, s.bounds().h), uh(0.0, kTwoPi);
    Pose p{ux(rng), uy(rng), uh(rng), 0.0};
    if (!s.navigable(p.position())) continue;
    ++checked;
    for (std::size_t k = 0; k < s.objects().size(); ++k) {
      CHECK(object_visible(s, p, k) == visible_oracle(s, p, k, {}));
    }
  }
}

TEST_CASE("success needs distance and visibility") {
  SceneData d = open_room();
  const Scene s(d);
  CHECK(is_success(s, {4.5, 5.0, 0.0, 0.0}, "bed"));
  CHECK_FALSE(is_success(s, {3.5, 5.0, 0.0, 0.0}, "bed"));
  CHECK_FALSE(is_success(s, {4.5, 5.0, std::numbers::pi, 0.0}, "bed"));
  CHECK_FALSE(is_success(s, {4.5, 5.0, 0.0, 0.0}, "sofa"));

  d.walls.push_back({4.45, 4.0, 0.1, 2.0});
  const Scene walled(d);
  CHECK_FALSE(is_success(walled, {4.3, 5.0, 0.0, 0.0}, "bed"));
}

TEST_CASE("observations never mark a cell both free and blocked") {
  const Scene s(generate_scene(3).data);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0.0, s.bounds().w), uy(0.0, s.bounds().h), uh(0.0, kTwoPi);
  for (int i = 0; i < 30;) {
    const Pose p{ux(rng), uy(rng), uh(rng), 0.0};
    if (!s.navigable(p.position())) continue;
    ++i;
    const auto obs = observe(s, p);
    std::set<Cell> free(obs.free_cells.begin(), obs.free_cells.end());
    for (const auto& c : obs.obstacle_cells) CHECK(free.count(c) == 0);
    for (const auto& c : obs.free_cells) CHECK(s.navigable(c));
  }
}

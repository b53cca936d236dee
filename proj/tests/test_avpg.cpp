#include <algorithm>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "topv/avpg.hpp"

using namespace topv;

namespace {

std::vector<Vec2> random_points(std::mt19937_64& rng, int n, double side) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Vec2> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

bool has_color(const PromptMap& m, Rgb c) {
  for (int y = 0; y < m.map_height_px; ++y) {
    for (int x = 0; x < m.image.width(); ++x) {
      if (m.image.at(x, y) == c) return true;
    }
  }
  return false;
}

// Small explored room with a trajectory, an obstacle strip and two objects.
OccupancyGrid sample_grid() {
  OccupancyGrid g({120, 100, 0.05}, {-3.0, -2.5});
  for (int y = 10; y < 90; ++y) {
    for (int x = 10; x < 110; ++x) g.set({x, y}, (x > 80 && x < 85) ? CellState::Obstacle : CellState::Free);
  }
  for (int x = 20; x < 60; ++x) g.trajectory().push_back({x, 40});
  g.objects().push_back({"bed", {-1.0, 0.0}, 0});
  g.objects().push_back({"chair", {-0.95, 0.05}, 3});
  return g;
}

}  // namespace

TEST_CASE("clustering small cases") {
  const std::vector<Vec2> two{{0.0, 0.0}, {1.0, 0.0}};
  const auto m = cluster_key_areas(two);
  REQUIRE(m.size() == 1);
  CHECK(m[0].centroid == Vec2{0.5, 0.0});
  CHECK(m[0].id == 1);

  const std::vector<Vec2> lone{{3.0, 3.0}};
  CHECK(cluster_key_areas(lone).empty());
  CHECK(cluster_key_areas(std::vector<Vec2>{}).empty());
}

TEST_CASE("clustering matches reference DBSCAN on random sets") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> count(1, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pts = random_points(rng, count(rng), 10.0);
    const auto got = cluster_key_areas(pts);
    const auto groups = oracle::groups_of(oracle::dbscan(pts, 1.3, 2));
    REQUIRE(oracle::partition_of(got) == oracle::Partition(groups.begin(), groups.end()));
    for (const auto& m : got) {
      const Vec2 mean = mean_of(m.members);
      CHECK(std::abs(m.centroid.x - mean.x) <= 1e-9);
      CHECK(std::abs(m.centroid.y - mean.y) <= 1e-9);
    }
  }
}

TEST_CASE("clustering does not depend on input order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_points(rng, 30, 8.0);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec2> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);

    auto as_points = [](const std::vector<KeyAreaMarker>& ms) {
      std::vector<std::vector<std::pair<double, double>>> out;
      for (const auto& m : ms) {
        std::vector<std::pair<double, double>> s;
        for (const auto& p : m.members) s.push_back({p.x, p.y});
        std::sort(s.begin(), s.end());
        out.push_back(s);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    CHECK(as_points(cluster_key_areas(pts)) == as_points(cluster_key_areas(shuffled)));
    // Every point is in at most one area.
    std::vector<int> seen(pts.size(), 0);
    for (const auto& m : cluster_key_areas(pts)) {
      for (auto i : m.member_indices) ++seen[i];
    }
    CHECK(*std::max_element(seen.begin(), seen.end()) <= 1);
  }
}

TEST_CASE("merging") {
  auto marker = [](int id, std::vector<Vec2> pts, std::size_t first) {
    KeyAreaMarker m;
    m.id = id;
    m.members = pts;
    for (std::size_t i = 0; i < pts.size(); ++i) m.member_indices.push_back(first + i);
    m.centroid = mean_of(pts);
    return m;
  };
  SUBCASE("close pair merges at the member mean") {
    const auto out = merge_areas({marker(1, {{0.0, 0.0}, {0.2, 0.0}}, 0), marker(2, {{0.6, 0.0}}, 2)});
    REQUIRE(out.size() == 1);
    CHECK(out[0].centroid.x == doctest::Approx(0.8 / 3.0));
  }
  SUBCASE("distant pair is kept") {
    CHECK(merge_areas({marker(1, {{0.0, 0.0}}, 0), marker(2, {{5.0, 0.0}}, 1)}).size() == 2);
  }
  SUBCASE("chain closes transitively") {
    const std::vector<Vec2> pts{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    const auto out = merge_areas({marker(1, {pts[0]}, 0), marker(2, {pts[1]}, 1), marker(3, {pts[2]}, 2)});
    const auto expected = oracle::merge_fixed_point(pts, {{0}, {1}, {2}}, 1.3);
    CHECK(out.size() == 1);
    CHECK(oracle::partition_of(out) == expected);
  }
}

TEST_CASE("clustering plus merging matches the reference pipeline") {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> count(1, 50);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = random_points(rng, count(rng), 10.0);
    const auto got = merge_areas(cluster_key_areas(pts));
    const auto expected = oracle::merge_fixed_point(pts, oracle::groups_of(oracle::dbscan(pts, 1.3, 2)), 1.3);
    REQUIRE(oracle::partition_of(got) == expected);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == static_cast<int>(i) + 1);
      for (std::size_t j = i + 1; j < got.size(); ++j) CHECK(distance(got[i].centroid, got[j].centroid) > 1.3);
    }
  }
}

TEST_CASE("text box metrics") {
  const PixelTransform tf{{0.0, 0.0, 10.0, 10.0}, 20.0};
  const std::vector<DetectedObject> objs{{"bed", {2.0, 2.0}, 0}, {"bed", {2.1, 2.0}, 0}};
  const auto boxes = layout_text_boxes(objs, tf);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].rect.w == 25.0);
  CHECK(boxes[0].rect.h == 12.0);
  CHECK(boxes[0].rect.x == boxes[0].anchor.x);
  CHECK(boxes[0].rect.y1() == boxes[0].anchor.y);
  CHECK(iou(boxes[0].rect, boxes[1].rect) > 0.0);
  CHECK(layout_text_boxes({}, tf).empty());
}

TEST_CASE("prompt map transform and determinism") {
  const auto g = sample_grid();
  const std::vector<Vec2> pts{{-1.0, 0.0}, {-0.95, 0.05}, {1.0, 1.0}, {1.2, 1.1}};
  auto markers = merge_areas(cluster_key_areas(pts));
  const auto frontiers = detect_frontiers(g);
  RenderInput in;
  in.grid = &g;
  in.markers = markers;
  in.frontiers = frontiers;
  in.pose = {0.0, 0.0, 0.5, 0.0};
  in.crop = default_crop(g, in.pose);
  const auto a = render_prompt_map(in);
  const auto b = render_prompt_map(in);
  CHECK(a.image == b.image);
  CHECK(encode_png(a.image) == encode_png(b.image));
  CHECK(prompt_sidecar(a) == prompt_sidecar(b));
  for (const auto& m : a.markers) {
    const Vec2 back = a.transform.to_world(a.transform.to_pixel(m.centroid));
    CHECK(distance(back, m.centroid) < 0.5 / a.transform.pixels_per_meter);
  }
  CHECK(a.image.width() == a.transform.raster_width());
  CHECK(a.image.height() > a.map_height_px);
  CHECK(a.transform.crop.x >= g.world_bounds().x);
  CHECK(a.transform.crop.x1() <= g.world_bounds().x1());
}

TEST_CASE("each render flag removes exactly its layer") {
  const auto g = sample_grid();
  RenderInput in;
  in.grid = &g;
  in.pose = {0.0, 0.0, 0.0, 0.0};
  in.crop = default_crop(g, in.pose);
  const auto full = render_prompt_map(in);
  REQUIRE(has_color(full, palette::kHistory));
  REQUIRE(has_color(full, palette::kObstacle));
  REQUIRE(has_color(full, palette::kTextBox));
  REQUIRE(has_color(full, palette::kGridLabel));

  struct Case {
    bool RenderLayers::*flag;
    Rgb gone;
  };
  const Case cases[] = {{&RenderLayers::history, palette::kHistory},
                        {&RenderLayers::obstacle, palette::kObstacle},
                        {&RenderLayers::textboxes, palette::kTextBox},
                        {&RenderLayers::coordinate, palette::kGridLabel}};
  for (const auto& c : cases) {
    RenderInput ab = in;
    ab.layers.*(c.flag) = false;
    const auto m = render_prompt_map(ab);
    CHECK_FALSE(has_color(m, c.gone));
    for (const auto& other : cases) {
      if (other.flag != c.flag) CHECK(has_color(m, other.gone));
    }
  }
  RenderInput no_boxes = in;
  no_boxes.layers.textboxes = false;
  CHECK(render_prompt_map(no_boxes).textboxes.empty());
}

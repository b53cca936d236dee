#include <doctest.h>
#include <json.hpp>

#include "mock_server.hpp"
#include "topv/harness.hpp"
#include "topv/reasoner.hpp"

using namespace topv;

namespace {

OccupancyGrid half_known() {
  OccupancyGrid g({200, 200, 0.05}, {0.0, 0.0});
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 120; ++x) g.set({x, y}, CellState::Free);
  }
  g.objects().push_back({"bed", {2.0, 2.0}, 0});
  g.objects().push_back({"nightstand", {2.3, 2.0}, 0});
  return g;
}

struct Fixture {
  OccupancyGrid grid = half_known();
  std::vector<KeyAreaMarker> markers;
  std::vector<Frontier> frontiers;
  PromptMap map;

  explicit Fixture(int n_markers = 2) {
    for (int i = 0; i < n_markers; ++i) {
      KeyAreaMarker m;
      m.id = i + 1;
      m.centroid = {2.0 + 3.0 * i, 2.0 + i};
      m.members = {m.centroid};
      m.member_indices = {static_cast<std::size_t>(i)};
      if (i == 0) m.object_labels = {"bed"};
      else m.frontier_members = 1;
      markers.push_back(m);
    }
    Frontier f;
    for (int y = 40; y < 80; ++y) f.cells.push_back({119, y});
    f.midpoint = {5.975, 3.0};
    frontiers.push_back(f);
    RenderInput in;
    in.grid = &grid;
    in.markers = markers;
    in.frontiers = frontiers;
    in.pose = {3.0, 3.0, 0.0, 0.0};
    in.crop = default_crop(grid, in.pose);
    map = render_prompt_map(in);
  }

  ReasonerQuery query(QueryRole role, std::string target = "bed") const {
    return {role, &map, std::move(target), 7};
  }
};

template <class T>
const T& as(const ReasonerAnswer& a) {
  REQUIRE(std::holds_alternative<T>(a.value));
  return std::get<T>(a.value);
}

}  // namespace

TEST_CASE("parse coordinates") {
  CHECK(parse_coordinates("The target is likely at (7.0, 9.0) near the hallway.") == Vec2{7.0, 9.0});
  CHECK_FALSE(parse_coordinates("I cannot tell.").has_value());
  CHECK(parse_coordinates("(1,2) then maybe (3,4)") == Vec2{1.0, 2.0});
  CHECK(parse_coordinates("go to ( -1.5 , .25 )") == Vec2{-1.5, 0.25});
  CHECK_FALSE(parse_coordinates("(1, two)").has_value());
  CHECK_FALSE(parse_coordinates("").has_value());
  CHECK_FALSE(parse_coordinates("(99999999999999999999999999999999999999999999" + std::string(400, '9') + ", 1)")
                  .has_value());
}

TEST_CASE("parse scores") {
  const std::vector<int> ids{1, 2};
  CHECK(parse_scores("m1: 0.8, m2: 0.3", ids) == std::vector<double>{0.8, 0.3});
  CHECK(parse_scores("m1: 1.7", ids) == std::vector<double>{1.0, 0.5});
  CHECK_FALSE(parse_scores("the bedroom looks promising", ids).has_value());
  CHECK(parse_scores("m2 = -3\nm9: 0.9", ids) == std::vector<double>{0.5, 0.0});
  CHECK(parse_scores("m1: 0.2 m1: 0.9", ids) == std::vector<double>{0.2, 0.5});
}

TEST_CASE("heuristic oracle") {
  const Fixture one(1);
  REQUIRE(one.map.markers.size() == 1);
  // A lone marker next to an unrelated object scores low; with no labels at
  // all it is the uninformed prior.
  Fixture bare(1);
  bare.map.markers[0].object_labels.clear();
  CHECK(as<ScoresAnswer>(HeuristicReasoner{}.query(bare.query(QueryRole::ScoreMarkers))).scores ==
        std::vector<double>{0.5});

  const Fixture fx;
  const HeuristicReasoner h;
  const auto s = as<ScoresAnswer>(h.query(fx.query(QueryRole::ScoreMarkers, "nightstand"))).scores;
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 0.9);
  CHECK(s[1] == 0.5);
  CHECK(as<ScoresAnswer>(h.query(fx.query(QueryRole::ScoreMarkers, "toilet"))).scores[0] == 0.1);

  const auto t = as<TargetAnswer>(h.query(fx.query(QueryRole::PredictTarget)));
  CHECK(t.position == fx.map.to_frame({5.975, 3.0}));

  // The bed and nightstand boxes overlap, so the oracle zooms between them.
  const auto r = as<RegionAnswer>(h.query(fx.query(QueryRole::SelectRegion)));
  REQUIRE(r.center.has_value());
  CHECK(r.center->x == doctest::Approx(fx.map.to_frame({2.15, 2.0}).x));

  // Pure: repeated queries give identical transcripts.
  for (auto role : {QueryRole::SelectRegion, QueryRole::PredictTarget, QueryRole::ScoreMarkers}) {
    CHECK(h.query(fx.query(role)).transcript == h.query(fx.query(role)).transcript);
  }
}

TEST_CASE("co-occurrence table") {
  CHECK(co_occurrence("bed", "bed") == 1.0);
  CHECK(co_occurrence("bed", "wardrobe") == 0.9);
  CHECK(co_occurrence("bed", "stove") == 0.1);
  CHECK(co_occurrence("bed", "spaceship") == 0.5);
  CHECK(room_of("toilet") == "bathroom");
  CHECK(room_of("spaceship").empty());
}

TEST_CASE("scripted oracle predicts the true target") {
  const auto gen = generate_scene(4);
  const Scene scene(gen.data);
  std::string target;
  Vec2 truth;
  for (const auto& o : scene.objects()) {
    if (o.category == "bed" || o.category == "toilet") {
      target = o.category;
      truth = o.position;
      break;
    }
  }
  REQUIRE_FALSE(target.empty());
  int same = 0;
  for (const auto& o : scene.objects()) same += o.category == target;

  OccupancyGrid g({400, 400, 0.05}, {0.0, 0.0});
  RenderInput in;
  in.grid = &g;
  in.pose = {start_pose(scene).x, start_pose(scene).y, 0.0, 0.0};
  in.crop = default_crop(g, in.pose);
  const auto map = render_prompt_map(in);
  const ScriptedReasoner s(scene);
  const auto a = as<TargetAnswer>(s.query({QueryRole::PredictTarget, &map, target, 1}));
  const Vec2 world = map.from_frame(a.position);
  if (same == 1) CHECK(distance(world, truth) < 1e-9);
  bool on_instance = false;
  for (const auto& o : scene.objects()) on_instance |= o.category == target && distance(world, o.position) < 1e-9;
  CHECK(on_instance);
  CHECK(s.query({QueryRole::PredictTarget, &map, target, 1}).transcript ==
        s.query({QueryRole::PredictTarget, &map, target, 1}).transcript);
}

TEST_CASE("random oracle answers validly and reproducibly") {
  const Fixture fx;
  const RandomReasoner r;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ReasonerQuery q = fx.query(QueryRole::ScoreMarkers);
    q.episode_seed = seed;
    const auto s = as<ScoresAnswer>(r.query(q)).scores;
    CHECK(s.size() == fx.map.markers.size());
    for (double v : s) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(r.query(q).transcript == r.query(q).transcript);
    q.role = QueryRole::PredictTarget;
    const Vec2 p = fx.map.from_frame(as<TargetAnswer>(r.query(q)).position);
    CHECK(fx.map.transform.crop.contains_closed(p));
  }
}

TEST_CASE("prompt rendering") {
  const Fixture fx;
  const auto text = render_prompt(fx.query(QueryRole::ScoreMarkers, "bed"));
  CHECK(text.find("{target}") == std::string::npos);
  CHECK(text.find("{markers}") == std::string::npos);
  CHECK(text.find("{frame}") == std::string::npos);
  CHECK(text.find("for a bed") != std::string::npos);
  CHECK(text.find("m1 at") != std::string::npos);
  CHECK(text.find("near: bed") != std::string::npos);

  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foo") == "Zm9v");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");

  const RemoteReasoner rr({"http://127.0.0.1:1/x"});
  const auto body = nlohmann::json::parse(rr.request_body(fx.query(QueryRole::PredictTarget)));
  CHECK(body["role"] == "predict_target");
  CHECK(body["image"].get<std::string>().rfind("iVBORw0KGgo", 0) == 0);  // PNG signature
  CHECK(body["metadata"]["markers"].size() == fx.map.markers.size());
  CHECK_THROWS_AS(RemoteReasoner({"ftp://nowhere"}), std::invalid_argument);
}

TEST_CASE("remote client against the mock server") {
  const Fixture fx;
  mock::Server server;
  server.start();
  const auto meta = nlohmann::json::parse(prompt_sidecar(fx.map));
  const RemoteReasoner rr({server.url(), std::chrono::milliseconds(5000), 2});

  const auto t = rr.query(fx.query(QueryRole::PredictTarget));
  CHECK_FALSE(t.fallback);
  const auto& mid = meta["frontiers"][0]["midpoint"];
  CHECK(std::abs(as<TargetAnswer>(t).position.x - mid[0].get<double>()) <= 0.005);
  CHECK(std::abs(as<TargetAnswer>(t).position.y - mid[1].get<double>()) <= 0.005);

  const auto s = rr.query(fx.query(QueryRole::ScoreMarkers));
  CHECK_FALSE(s.fallback);
  CHECK(as<ScoresAnswer>(s).scores == std::vector<double>{0.8, 0.3});

  const auto r = rr.query(fx.query(QueryRole::SelectRegion));
  CHECK_FALSE(r.fallback);
  const auto& pos = meta["textboxes"][0]["position"];
  REQUIRE(as<RegionAnswer>(r).center.has_value());
  CHECK(std::abs(as<RegionAnswer>(r).center->x - pos[0].get<double>()) <= 0.005);

  CHECK(server.counts().at("predict_target") == 1);
  CHECK(server.counts().at("score_markers") == 1);
  CHECK(server.counts().at("select_region") == 1);

  // Unparseable text falls back to the heuristic answer for the role.
  server.set_mode(mock::Mode::Garbage);
  const auto g = rr.query(fx.query(QueryRole::ScoreMarkers));
  CHECK(g.fallback);
  CHECK(as<ScoresAnswer>(g).scores == as<ScoresAnswer>(HeuristicReasoner{}.query(fx.query(QueryRole::ScoreMarkers))).scores);
  // A decline is a valid region answer, not a failure.
  CHECK_FALSE(rr.query(fx.query(QueryRole::SelectRegion)).fallback);

  // HTTP errors are retried twice before falling back.
  server.set_mode(mock::Mode::Fail);
  const int before = server.counts().at("predict_target");
  const auto f = rr.query(fx.query(QueryRole::PredictTarget));
  CHECK(f.fallback);
  CHECK(server.counts().at("predict_target") - before == 3);
  CHECK(as<TargetAnswer>(f).position == as<TargetAnswer>(HeuristicReasoner{}.query(fx.query(QueryRole::PredictTarget))).position);

  // Nothing listening.
  const std::string url = server.url();
  server.stop();
  const RemoteReasoner closed({url, std::chrono::milliseconds(300), 2});
  const auto c = closed.query(fx.query(QueryRole::ScoreMarkers));
  CHECK(c.fallback);
  CHECK(c.transcript.find("attempt 3") != std::string::npos);
}

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "topv/harness.hpp"
#include "topv/search.hpp"
#include "topv/topmap.hpp"

namespace topv {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

// Distances from the success disk of every instance of a category.
std::vector<std::int64_t> success_field(const Scene& scene, std::string_view category, double radius) {
  std::vector<Cell> sources;
  for (const auto& o : scene.objects()) {
    if (o.category != category) continue;
    const Cell lo = scene.cell_of(o.position - Vec2{radius, radius});
    const Cell hi = scene.cell_of(o.position + Vec2{radius, radius});
    for (int y = lo.y; y <= hi.y; ++y) {
      for (int x = lo.x; x <= hi.x; ++x) {
        if (scene.navigable(Cell{x, y}) && distance(scene.cell_center({x, y}), o.position) <= radius) {
          sources.push_back({x, y});
        }
      }
    }
  }
  return cost_field(navigable_space(scene), sources);
}

}  // namespace

Suite make_suite(std::uint64_t seed, int num_scenes, int num_episodes, const SceneSpec& spec,
                 double min_start_distance) {
  if (num_scenes < 1 || num_episodes < 1) throw std::invalid_argument("suite needs scenes and episodes");
  Suite suite;
  std::vector<Scene> scenes;
  for (int s = 0; s < num_scenes; ++s) {
    char id[32];
    std::snprintf(id, sizeof id, "scene_%03d", s);
    auto g = generate_scene(splitmix(seed * 1000003ULL + static_cast<std::uint64_t>(s)), spec);
    suite.scene_ids.emplace_back(id);
    suite.scenes.push_back(g.data);
    scenes.emplace_back(g.data);
  }

  std::map<std::pair<int, std::string>, std::vector<std::int64_t>> fields;
  constexpr std::size_t kTargets = std::size(kTargetCategories);
  for (int e = 0; e < num_episodes; ++e) {
    const int s = e % num_scenes;
    const Scene& scene = scenes[s];
    const auto& targets = suite.scenes[s].targets;
    if (targets.empty()) continue;
    std::string target;
    for (std::size_t k = 0; k < kTargets && target.empty(); ++k) {
      const auto cat = kTargetCategories[(static_cast<std::size_t>(e / num_scenes) + s + k) % kTargets];
      if (std::find(targets.begin(), targets.end(), cat) != targets.end()) target = cat;
    }
    auto& field = fields[{s, target}];
    if (field.empty()) field = success_field(scene, target, 1.0);

    Episode ep;
    ep.scene_id = suite.scene_ids[s];
    ep.target = target;
    ep.seed = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(e) + 1));
    std::mt19937_64 rng(ep.seed);
    std::uniform_real_distribution<double> ux(0.3, scene.bounds().w - 0.3), uy(0.3, scene.bounds().h - 0.3);
    for (int attempt = 0; attempt < 2000 && !ep.start; ++attempt) {
      const Vec2 p{ux(rng), uy(rng)};
      const double heading = static_cast<double>(rng() % 12) * 30.0;
      if (!clear_around(scene, p, 0.3)) continue;
      const Cell c = scene.cell_of(p);
      const auto v = field[static_cast<std::size_t>(c.y) * scene.cols() + c.x];
      if (v == kUnreachable) continue;
      if (static_cast<double>(v) / kOrthCost * scene.meters_per_cell() < min_start_distance) continue;
      ep.start = StartPose{p, heading};
    }
    if (!ep.start) continue;
    suite.episodes.push_back(std::move(ep));
  }
  return suite;
}

void save_suite(const Suite& suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "scenes");
  nlohmann::json j;
  j["scenes"] = suite.scene_ids;
  auto& eps = j["episodes"] = nlohmann::json::array();
  for (const auto& e : suite.episodes) {
    nlohmann::json row{{"scene", e.scene_id}, {"target", e.target}, {"seed", e.seed}};
    if (e.start) row["start"] = {e.start->position.x, e.start->position.y, e.start->heading_deg};
    eps.push_back(row);
  }
  write_file(dir / "suite.json", j.dump(2) + "\n");
  for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
    write_file(dir / "scenes" / (suite.scene_ids[i] + ".json"), serialize_scene(suite.scenes[i]) + "\n");
  }
}

Suite load_suite(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(read_file(dir / "suite.json"));
  Suite suite;
  for (const auto& id : j.at("scenes")) {
    suite.scene_ids.push_back(id.get<std::string>());
    suite.scenes.push_back(load_scene(read_file(dir / "scenes" / (suite.scene_ids.back() + ".json"))).data());
  }
  for (const auto& row : j.at("episodes")) {
    Episode e;
    e.scene_id = row.at("scene").get<std::string>();
    e.target = row.at("target").get<std::string>();
    e.seed = row.at("seed").get<std::uint64_t>();
    if (row.contains("start")) {
      const auto& s = row["start"];
      e.start = StartPose{{s.at(0).get<double>(), s.at(1).get<double>()}, s.at(2).get<double>()};
    }
    if (std::find(suite.scene_ids.begin(), suite.scene_ids.end(), e.scene_id) == suite.scene_ids.end()) {
      throw std::runtime_error("suite: episode refers to unknown scene " + e.scene_id);
    }
    suite.episodes.push_back(std::move(e));
  }
  return suite;
}

}  // namespace topv

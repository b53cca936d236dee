#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "topv/topmap.hpp"

namespace topv {

OccupancyGrid::OccupancyGrid(GridConfig cfg, Vec2 origin)
    : cfg_(cfg),
      origin_(origin),
      cells_(static_cast<std::size_t>(cfg.width) * cfg.height, CellState::Unknown),
      unknown_count_(cells_.size()) {
  if (cfg.width <= 0 || cfg.height <= 0 || !(cfg.meters_per_cell > 0.0)) {
    throw std::invalid_argument("OccupancyGrid: non-positive size or resolution");
  }
}

OccupancyGrid OccupancyGrid::centered_on(GridConfig cfg, Vec2 start) {
  const double res = cfg.meters_per_cell;
  const Vec2 origin{(std::floor(start.x / res) - cfg.width / 2) * res,
                    (std::floor(start.y / res) - cfg.height / 2) * res};
  return OccupancyGrid(cfg, origin);
}

void OccupancyGrid::set(Cell c, CellState s) {
  if (!in_bounds(c)) return;
  auto& cur = cells_[index(c)];
  if (cur == CellState::Unknown && s != CellState::Unknown) --unknown_count_;
  if (cur != CellState::Unknown && s == CellState::Unknown) ++unknown_count_;
  cur = s;
  if (s == CellState::Unknown) return;
  if (!box_) {
    box_ = CellBox{c, c};
  } else {
    box_->lo = {std::min(box_->lo.x, c.x), std::min(box_->lo.y, c.y)};
    box_->hi = {std::max(box_->hi.x, c.x), std::max(box_->hi.y, c.y)};
  }
}

Cell OccupancyGrid::world_to_cell(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / cfg_.meters_per_cell)),
          static_cast<int>(std::floor((p.y - origin_.y) / cfg_.meters_per_cell))};
}

Vec2 OccupancyGrid::cell_center(Cell c) const {
  return {origin_.x + (c.x + 0.5) * cfg_.meters_per_cell, origin_.y + (c.y + 0.5) * cfg_.meters_per_cell};
}

std::optional<OccupancyGrid::CellBox> OccupancyGrid::known_box() const { return box_; }

SearchGrid OccupancyGrid::free_space() const {
  SearchGrid g;
  g.cols = cfg_.width;
  g.rows = cfg_.height;
  g.passable.resize(cells_.size());
  std::transform(cells_.begin(), cells_.end(), g.passable.begin(),
                 [](CellState s) { return static_cast<std::uint8_t>(s == CellState::Free); });
  return g;
}

void integrate(OccupancyGrid& grid, const Observation& obs, const Pose& pose, double obs_meters_per_cell,
               int step_index) {
  auto to_grid = [&](Cell c) {
    return grid.world_to_cell({(c.x + 0.5) * obs_meters_per_cell, (c.y + 0.5) * obs_meters_per_cell});
  };
  for (const Cell c : obs.free_cells) {
    const Cell g = to_grid(c);
    if (grid.at(g) != CellState::Obstacle) grid.set(g, CellState::Free);
  }
  for (const Cell c : obs.obstacle_cells) grid.set(to_grid(c), CellState::Obstacle);

  for (const auto& v : obs.visible_objects) {
    if (!grid.in_bounds(grid.world_to_cell(v.position))) continue;
    const bool known = std::any_of(grid.objects().begin(), grid.objects().end(), [&](const DetectedObject& o) {
      return o.category == v.category && distance(o.position, v.position) <= kObjectDedupRadius;
    });
    if (!known) grid.objects().push_back({v.category, v.position, step_index});
  }

  const Cell here = grid.world_to_cell(pose.position());
  if (grid.at(here) == CellState::Free) grid.trajectory().push_back(here);
}

SearchGrid navigable_space(const Scene& scene) {
  SearchGrid g;
  g.cols = scene.cols();
  g.rows = scene.rows();
  g.passable.resize(static_cast<std::size_t>(g.cols) * g.rows);
  for (int y = 0; y < g.rows; ++y) {
    for (int x = 0; x < g.cols; ++x) g.passable[g.index({x, y})] = scene.navigable(Cell{x, y}) ? 1 : 0;
  }
  return g;
}

std::optional<double> shortest_path_length(const Scene& scene, Vec2 from, Vec2 to) {
  const auto g = navigable_space(scene);
  auto path = astar(g, scene.cell_of(from), scene.cell_of(to));
  if (!path) return std::nullopt;
  return path->length(scene.meters_per_cell());
}

std::optional<double> shortest_path_to_category(const Scene& scene, Vec2 from, std::string_view category,
                                                double radius) {
  std::vector<Vec2> centers;
  for (const auto& o : scene.objects()) {
    if (o.category == category) centers.push_back(o.position);
  }
  if (centers.empty()) return std::nullopt;
  const auto g = navigable_space(scene);
  auto path = search_to_any(g, scene.cell_of(from), [&](Cell c) {
    const Vec2 p = scene.cell_center(c);
    return std::any_of(centers.begin(), centers.end(), [&](Vec2 m) { return distance(p, m) <= radius; });
  });
  if (!path) return std::nullopt;
  return path->length(scene.meters_per_cell());
}

std::string grid_to_pgm(const OccupancyGrid& grid) {
  std::ostringstream os;
  os << "P5\n" << grid.width() << " " << grid.height() << "\n255\n";
  std::string body(static_cast<std::size_t>(grid.width()) * grid.height(), '\0');
  std::size_t k = 0;
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) {
      unsigned char v = 128;
      switch (grid.at({x, y})) {
        case CellState::Free: v = 255; break;
        case CellState::Obstacle: v = 0; break;
        case CellState::Unknown: v = 128; break;
      }
      body[k++] = static_cast<char>(v);
    }
  }
  os << body;
  return os.str();
}

std::string grid_sidecar(const OccupancyGrid& grid, int step_index) {
  nlohmann::json j;
  j["width"] = grid.width();
  j["height"] = grid.height();
  j["meters_per_cell"] = grid.meters_per_cell();
  j["origin"] = {grid.origin().x, grid.origin().y};
  j["step"] = step_index;
  j["objects"] = nlohmann::json::array();
  for (const auto& o : grid.objects()) {
    j["objects"].push_back(
        {{"category", o.category}, {"position", {o.position.x, o.position.y}}, {"first_seen", o.first_seen}});
  }
  j["trajectory"] = nlohmann::json::array();
  for (const auto& c : grid.trajectory()) j["trajectory"].push_back({c.x, c.y});
  return j.dump(2);
}

OccupancyGrid grid_from_snapshot(std::string_view pgm, std::string_view sidecar) {
  const auto meta = nlohmann::json::parse(sidecar);
  GridConfig cfg;
  cfg.width = meta.at("width").get<int>();
  cfg.height = meta.at("height").get<int>();
  cfg.meters_per_cell = meta.at("meters_per_cell").get<double>();
  OccupancyGrid grid(cfg, {meta.at("origin")[0].get<double>(), meta.at("origin")[1].get<double>()});

  std::istringstream is{std::string(pgm)};
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  is.get();
  if (magic != "P5" || w != cfg.width || h != cfg.height || maxval != 255) {
    throw std::runtime_error("grid snapshot: PGM header does not match sidecar");
  }
  std::string body(static_cast<std::size_t>(w) * h, '\0');
  is.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (is.gcount() != static_cast<std::streamsize>(body.size())) {
    throw std::runtime_error("grid snapshot: truncated PGM body");
  }
  std::size_t k = 0;
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<unsigned char>(body[k++]);
      if (v == 255) grid.set({x, y}, CellState::Free);
      if (v == 0) grid.set({x, y}, CellState::Obstacle);
    }
  }
  for (const auto& o : meta.at("objects")) {
    grid.objects().push_back({o.at("category").get<std::string>(),
                              {o.at("position")[0].get<double>(), o.at("position")[1].get<double>()},
                              o.at("first_seen").get<int>()});
  }
  for (const auto& c : meta.at("trajectory")) grid.trajectory().push_back({c[0].get<int>(), c[1].get<int>()});
  return grid;
}

}  // namespace topv

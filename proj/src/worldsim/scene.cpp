#include <cmath>
#include <sstream>

#include <json.hpp>

#include "topv/worldsim.hpp"

namespace topv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SceneError(path + ": " + what);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::vector<double> numbers_at(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) {
    fail(path, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Rect rect_at(const json& j, const std::string& path) {
  const auto v = numbers_at(j, 4, path);
  return {v[0], v[1], v[2], v[3]};
}

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

void validate(const SceneData& d) {
  if (!(d.width > 0.0) || !(d.height > 0.0)) fail("bounds", "width and height must be positive");
  const Rect bounds{0.0, 0.0, d.width, d.height};
  for (std::size_t i = 0; i < d.walls.size(); ++i) {
    const auto& w = d.walls[i];
    if (!(w.w > 0.0) || !(w.h > 0.0)) {
      fail("walls[" + std::to_string(i) + "].rect", "wall must have positive extent");
    }
  }
  for (std::size_t i = 0; i < d.objects.size(); ++i) {
    const auto& o = d.objects[i];
    const std::string path = "objects[" + std::to_string(i) + "]";
    if (o.category.empty()) fail(path + ".category", "category must be non-empty");
    if (!bounds.contains_closed(o.position)) fail(path + ".position", "object lies outside bounds");
    if (!(o.footprint.w > 0.0) || !(o.footprint.h > 0.0)) {
      fail(path + ".footprint", "footprint must have positive extent");
    }
    if (!o.footprint.contains_closed(o.position)) {
      fail(path + ".footprint", "footprint does not contain position");
    }
    if (!bounds.contains(o.footprint)) fail(path + ".footprint", "footprint lies outside bounds");
  }
  for (std::size_t i = 0; i < d.targets.size(); ++i) {
    if (d.targets[i].empty()) fail("targets[" + std::to_string(i) + "]", "empty category");
  }
}

}  // namespace

Scene::Scene(SceneData data, double meters_per_cell) : data_(std::move(data)), res_(meters_per_cell) {
  if (!(res_ > 0.0)) throw SceneError("meters_per_cell must be positive");
  validate(data_);
  cols_ = static_cast<int>(std::ceil(data_.width / res_ - 1e-9));
  rows_ = static_cast<int>(std::ceil(data_.height / res_ - 1e-9));
  labels_.assign(static_cast<std::size_t>(cols_) * rows_, kFree);

  auto paint = [&](const Rect& r, std::int32_t value, bool only_free) {
    const int cx0 = std::max(0, static_cast<int>(std::floor(r.x / res_ - 0.5)));
    const int cy0 = std::max(0, static_cast<int>(std::floor(r.y / res_ - 0.5)));
    const int cx1 = std::min(cols_ - 1, static_cast<int>(std::ceil(r.x1() / res_)));
    const int cy1 = std::min(rows_ - 1, static_cast<int>(std::ceil(r.y1() / res_)));
    for (int y = cy0; y <= cy1; ++y) {
      for (int x = cx0; x <= cx1; ++x) {
        if (!r.contains(cell_center({x, y}))) continue;
        auto& l = labels_[static_cast<std::size_t>(y) * cols_ + x];
        if (only_free && l != kFree) continue;
        l = value;
      }
    }
  };
  for (const auto& w : data_.walls) paint(w, kWall, false);
  for (std::size_t i = 0; i < data_.objects.size(); ++i) {
    paint(data_.objects[i].footprint, static_cast<std::int32_t>(i) + 2, true);
  }
  for (auto l : labels_) navigable_count_ += (l == kFree);
  if (navigable_count_ == 0) throw SceneError("scene has no navigable cell");

  if (data_.start) {
    if (!bounds().contains(data_.start->position) || !navigable(data_.start->position)) {
      throw SceneError("start.pose: start position is not navigable");
    }
  }
}

Cell Scene::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor(p.x / res_)), static_cast<int>(std::floor(p.y / res_))};
}

Vec2 Scene::cell_center(Cell c) const { return {(c.x + 0.5) * res_, (c.y + 0.5) * res_}; }

std::int32_t Scene::label(Cell c) const {
  if (!in_bounds(c)) return kWall;
  return labels_[static_cast<std::size_t>(c.y) * cols_ + c.x];
}

std::optional<std::size_t> Scene::object_at(Cell c) const {
  const auto l = label(c);
  if (l < 2) return std::nullopt;
  return static_cast<std::size_t>(l - 2);
}

Scene load_scene(std::string_view document, double meters_per_cell) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SceneError(std::string("document: ") + e.what());
  }
  if (!root.is_object()) fail("document", "expected an object");

  SceneData d;
  const auto bounds = numbers_at(field(root, "bounds", "document"), 2, "bounds");
  d.width = bounds[0];
  d.height = bounds[1];

  if (auto it = root.find("walls"); it != root.end()) {
    if (!it->is_array()) fail("walls", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "walls[" + std::to_string(i) + "]";
      const auto& w = (*it)[i];
      if (!w.is_object()) fail(path, "expected an object");
      d.walls.push_back(rect_at(field(w, "rect", path), path + ".rect"));
    }
  }
  if (auto it = root.find("objects"); it != root.end()) {
    if (!it->is_array()) fail("objects", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "objects[" + std::to_string(i) + "]";
      const auto& o = (*it)[i];
      if (!o.is_object()) fail(path, "expected an object");
      PlacedObject obj;
      const auto& cat = field(o, "category", path);
      if (!cat.is_string()) fail(path + ".category", "expected a string");
      obj.category = cat.get<std::string>();
      const auto pos = numbers_at(field(o, "position", path), 2, path + ".position");
      obj.position = {pos[0], pos[1]};
      obj.footprint = rect_at(field(o, "footprint", path), path + ".footprint");
      d.objects.push_back(std::move(obj));
    }
  }
  if (auto it = root.find("start"); it != root.end()) {
    if (!it->is_object()) fail("start", "expected an object");
    const auto p = numbers_at(field(*it, "pose", "start"), 3, "start.pose");
    d.start = StartPose{{p[0], p[1]}, p[2]};
  }
  if (auto it = root.find("targets"); it != root.end()) {
    if (!it->is_array()) fail("targets", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) fail("targets[" + std::to_string(i) + "]", "expected a string");
      d.targets.push_back((*it)[i].get<std::string>());
    }
  }
  return Scene(std::move(d), meters_per_cell);
}

std::string serialize_scene(const SceneData& d) {
  json root;
  root["bounds"] = {d.width, d.height};
  root["walls"] = json::array();
  for (const auto& w : d.walls) root["walls"].push_back({{"rect", {w.x, w.y, w.w, w.h}}});
  root["objects"] = json::array();
  for (const auto& o : d.objects) {
    root["objects"].push_back({{"category", o.category},
                               {"position", {o.position.x, o.position.y}},
                               {"footprint", {o.footprint.x, o.footprint.y, o.footprint.w, o.footprint.h}}});
  }
  if (d.start) {
    root["start"] = {{"pose", {d.start->position.x, d.start->position.y, d.start->heading_deg}}};
  }
  root["targets"] = d.targets;
  return root.dump(2);
}

Pose start_pose(const Scene& scene) {
  const auto& s = scene.data().start;
  if (!s) throw SceneError("start: scene has no start pose");
  return {s->position.x, s->position.y, wrap_angle_positive(deg_to_rad(s->heading_deg)), 0.0};
}

}  // namespace topv

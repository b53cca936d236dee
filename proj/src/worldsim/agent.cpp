#include <algorithm>
#include <cmath>

#include "topv/raycast.hpp"
#include "topv/worldsim.hpp"

namespace topv {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::MoveForward: return "move_forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::LookUp: return "look_up";
    case Action::LookDown: return "look_down";
    case Action::Stop: return "stop";
  }
  return "unknown";
}

namespace {

// Headings are kept on a micro-degree lattice so repeated turns do not drift.
double turned(double heading, double delta_deg) {
  double deg = std::round((rad_to_deg(heading) + delta_deg) * 1e6) / 1e6;
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg_to_rad(deg);
}

}  // namespace

Pose step(const Scene& scene, const Pose& pose, Action action, const SimConfig& cfg) {
  Pose next = pose;
  switch (action) {
    case Action::MoveForward: {
      const Vec2 from = pose.position();
      const Vec2 to = from + Vec2{std::cos(pose.heading), std::sin(pose.heading)} * cfg.forward_step;
      // Every cell swept by the move must be navigable, not only the
      // destination, so thin walls cannot be stepped through.
      const bool clear = traverse_cells(from, to, {0.0, 0.0}, scene.meters_per_cell(),
                                        [&](Cell c) { return scene.navigable(c); });
      if (clear && scene.bounds().contains(to)) {
        next.x = to.x;
        next.y = to.y;
      }
      break;
    }
    case Action::TurnLeft:
      next.heading = turned(pose.heading, cfg.turn_deg);
      break;
    case Action::TurnRight:
      next.heading = turned(pose.heading, -cfg.turn_deg);
      break;
    case Action::LookUp:
      next.tilt = std::min(pose.tilt + deg_to_rad(cfg.tilt_deg), deg_to_rad(2.0 * cfg.tilt_deg));
      break;
    case Action::LookDown:
      next.tilt = std::max(pose.tilt - deg_to_rad(cfg.tilt_deg), -deg_to_rad(2.0 * cfg.tilt_deg));
      break;
    case Action::Stop:
      break;
  }
  return next;
}

namespace {

void sort_unique(std::vector<Cell>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool within_fov(const Pose& pose, Vec2 target, const SimConfig& cfg) {
  const Vec2 d = target - pose.position();
  const double bearing = std::atan2(d.y, d.x);
  return std::abs(wrap_angle_signed(bearing - pose.heading)) <= deg_to_rad(cfg.fov_deg) / 2.0 + 1e-12;
}

}  // namespace

bool object_visible(const Scene& scene, const Pose& pose, std::size_t object_index, const SimConfig& cfg) {
  const auto& obj = scene.objects().at(object_index);
  if (distance(pose.position(), obj.position) > cfg.max_range) return false;
  if (!within_fov(pose, obj.position, cfg)) return false;
  const auto own = static_cast<std::int32_t>(object_index) + 2;
  return traverse_cells(pose.position(), obj.position, {0.0, 0.0}, scene.meters_per_cell(), [&](Cell c) {
    const auto l = scene.label(c);
    return l == Scene::kFree || l == own;
  });
}

Observation observe(const Scene& scene, const Pose& pose, const SimConfig& cfg) {
  Observation obs;
  const double res = scene.meters_per_cell();
  const double fov = deg_to_rad(cfg.fov_deg);
  // Adjacent rays are at most one cell apart at max range.
  const double max_step = res / cfg.max_range;
  const int n_rays = static_cast<int>(std::ceil(fov / max_step)) + 1;
  const Vec2 origin = pose.position();

  obs.free_cells.push_back(scene.cell_of(origin));
  for (int i = 0; i < n_rays; ++i) {
    const double a = pose.heading - fov / 2.0 + fov * i / (n_rays - 1);
    const Vec2 end = origin + Vec2{std::cos(a), std::sin(a)} * cfg.max_range;
    traverse_cells(origin, end, {0.0, 0.0}, res, [&](Cell c) {
      if (scene.navigable(c)) {
        obs.free_cells.push_back(c);
        return true;
      }
      obs.obstacle_cells.push_back(c);
      return false;
    });
  }
  sort_unique(obs.free_cells);
  sort_unique(obs.obstacle_cells);

  for (std::size_t i = 0; i < scene.objects().size(); ++i) {
    if (object_visible(scene, pose, i, cfg)) {
      const auto& o = scene.objects()[i];
      obs.visible_objects.push_back({o.category, o.position});
    }
  }
  return obs;
}

bool is_success(const Scene& scene, const Pose& pose, std::string_view target, const SimConfig& cfg) {
  for (std::size_t i = 0; i < scene.objects().size(); ++i) {
    const auto& o = scene.objects()[i];
    if (o.category != target) continue;
    if (distance(pose.position(), o.position) > cfg.success_distance) continue;
    if (object_visible(scene, pose, i, cfg)) return true;
  }
  return false;
}

}  // namespace topv

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topv/geometry.hpp"

namespace topv {

// Agent kinematics and sensor model. Defaults follow the usual embodied
// simulator conventions; every field can be overridden from a config file.
struct SimConfig {
  double forward_step = 0.25;     // meters
  double turn_deg = 30.0;
  double tilt_deg = 30.0;
  double fov_deg = 90.0;          // horizontal
  double max_range = 5.0;         // meters
  double success_distance = 1.0;  // meters
  double meters_per_cell = 0.05;

  bool operator==(const SimConfig&) const = default;
};

struct PlacedObject {
  std::string category;
  Vec2 position;
  Rect footprint;

  bool operator==(const PlacedObject&) const = default;
};

struct StartPose {
  Vec2 position;
  double heading_deg = 0.0;

  bool operator==(const StartPose&) const = default;
};

// Plain scene description as it appears in a scene document.
struct SceneData {
  double width = 0.0;
  double height = 0.0;
  std::vector<Rect> walls;
  std::vector<PlacedObject> objects;
  std::optional<StartPose> start;
  std::vector<std::string> targets;

  bool operator==(const SceneData&) const = default;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validated, immutable scene plus its ground-truth raster. Every cell of the
// raster carries a label: free, wall (or out of bounds) or the index of the
// object whose footprint covers it.
class Scene {
 public:
  static constexpr std::int32_t kFree = 0;
  static constexpr std::int32_t kWall = 1;

  explicit Scene(SceneData data, double meters_per_cell = 0.05);

  const SceneData& data() const { return data_; }
  Rect bounds() const { return {0.0, 0.0, data_.width, data_.height}; }
  const std::vector<PlacedObject>& objects() const { return data_.objects; }
  double meters_per_cell() const { return res_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }

  Cell cell_of(Vec2 p) const;
  Vec2 cell_center(Cell c) const;
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < cols_ && c.y < rows_; }

  // kWall outside the raster.
  std::int32_t label(Cell c) const;
  bool navigable(Cell c) const { return label(c) == kFree; }
  bool navigable(Vec2 p) const { return navigable(cell_of(p)); }
  // Object index covering the cell, if any.
  std::optional<std::size_t> object_at(Cell c) const;

  std::size_t navigable_count() const { return navigable_count_; }

  bool operator==(const Scene& o) const { return data_ == o.data_; }

 private:
  SceneData data_;
  double res_;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::int32_t> labels_;
  std::size_t navigable_count_ = 0;
};

// Parses and validates a scene document. Throws SceneError with the field
// path of the offending entry.
Scene load_scene(std::string_view document, double meters_per_cell = 0.05);
std::string serialize_scene(const SceneData& data);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in [0, 2pi)
  double tilt = 0.0;     // radians

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

Pose start_pose(const Scene& scene);

enum class Action : std::uint8_t { MoveForward, TurnLeft, TurnRight, LookUp, LookDown, Stop };

std::string_view to_string(Action a);

struct VisibleObject {
  std::string category;
  Vec2 position;

  bool operator==(const VisibleObject&) const = default;
};

// Cells are in the scene raster frame (see Scene::cell_of).
struct Observation {
  std::vector<Cell> free_cells;
  std::vector<Cell> obstacle_cells;
  std::vector<VisibleObject> visible_objects;
};

Pose step(const Scene& scene, const Pose& pose, Action action, const SimConfig& cfg = {});

Observation observe(const Scene& scene, const Pose& pose, const SimConfig& cfg = {});

// Line of sight from the pose to the object's center within range and field
// of view. Only the object's own footprint may lie on the sight line.
bool object_visible(const Scene& scene, const Pose& pose, std::size_t object_index,
                    const SimConfig& cfg = {});

bool is_success(const Scene& scene, const Pose& pose, std::string_view target,
                const SimConfig& cfg = {});

}  // namespace topv

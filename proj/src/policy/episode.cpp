#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "topv/dms.hpp"
#include "topv/policy.hpp"

namespace topv {

std::string_view to_string(GoalMode m) {
  switch (m) {
    case GoalMode::Gaussian: return "gaussian";
    case GoalMode::Max: return "max";
    case GoalMode::MarkerOnly: return "marker_only";
  }
  return "unknown";
}

std::optional<GoalMode> parse_goal_mode(std::string_view s) {
  if (s == "gaussian") return GoalMode::Gaussian;
  if (s == "max") return GoalMode::Max;
  if (s == "marker_only") return GoalMode::MarkerOnly;
  return std::nullopt;
}

namespace {

using nlohmann::json;

json to_json(Vec2 p) { return json::array({p.x, p.y}); }

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// One episode's mutable state. Every low-level action goes through act(),
// which keeps the step count, path length and map in sync with the pose.
class EpisodeRunner {
 public:
  EpisodeRunner(const Scene& scene, const Episode& ep, const Reasoner& reasoner, const PipelineConfig& cfg,
                const std::filesystem::path* debug_dir)
      : scene_(scene),
        ep_(ep),
        reasoner_(reasoner),
        cfg_(cfg),
        debug_dir_(debug_dir),
        pose_(initial_pose(scene, ep)),
        grid_(OccupancyGrid::centered_on(cfg.grid, pose_.position())),
        exhausted_(static_cast<std::size_t>(grid_.width()) * grid_.height(), 0) {
    r_.scene_id = ep.scene_id;
    r_.target = ep.target;
    r_.seed = ep.seed;
    r_.shortest_length =
        shortest_path_to_category(scene, pose_.position(), ep.target, cfg.sim.success_distance).value_or(0.0);
    r_.poses.push_back(pose_);
    sense();
  }

  EpisodeResult run();
  const OccupancyGrid& grid() const { return grid_; }
  const Pose& pose() const { return pose_; }

 private:
  static Pose initial_pose(const Scene& scene, const Episode& ep) {
    if (!ep.start) return start_pose(scene);
    return {ep.start->position.x, ep.start->position.y, wrap_angle_positive(deg_to_rad(ep.start->heading_deg)), 0.0};
  }

  int limit() const { return cfg_.policy.step_limit; }
  bool out_of_steps() const { return r_.steps >= limit(); }

  void sense() {
    const Observation obs = observe(scene_, pose_, cfg_.sim);
    integrate(grid_, obs, pose_, scene_.meters_per_cell(), r_.steps);
    for (const auto& v : obs.visible_objects) {
      if (v.category != ep_.target) continue;
      if (!target_ || distance(v.position, pose_.position()) < distance(*target_, pose_.position())) {
        target_ = v.position;
      }
      r_.target_seen = true;
    }
  }

  void act(Action a) {
    const Pose next = step(scene_, pose_, a, cfg_.sim);
    const double moved = distance(next.position(), pose_.position());
    r_.path_length += moved;
    pose_ = next;
    ++r_.steps;
    r_.actions.push_back(a);
    r_.poses.push_back(pose_);
    idle_ = moved > 0.0 ? 0 : idle_ + 1;
    if (a != Action::Stop) sense();
  }

  void exhaust(Vec2 p) {
    const double res = grid_.meters_per_cell();
    const int r = static_cast<int>(std::ceil(cfg_.policy.exhausted_radius / res));
    const Cell c0 = grid_.world_to_cell(p);
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const Cell c{c0.x + dx, c0.y + dy};
        if (grid_.in_bounds(c) && std::hypot(dx, dy) * res <= cfg_.policy.exhausted_radius) {
          exhausted_[grid_.index(c)] = 1;
        }
      }
    }
  }

  PlanOptions plan_options() const { return {cfg_.policy.clearance_radius, 4.0}; }

  // Turns in place through a full view of the surroundings.
  void look_around() {
    const double span = 360.0 - cfg_.sim.fov_deg;
    const int turns = span > 0.0 ? static_cast<int>(std::ceil(span / cfg_.sim.turn_deg - 1e-9)) : 0;
    for (int i = 0; i < turns && !target_ && !out_of_steps(); ++i) act(Action::TurnLeft);
  }

  Plan approach_plan() {
    Plan p;
    p.mode = PlanMode::Approach;
    p.goal = *target_;
    const Cell start = grid_.world_to_cell(pose_.position());
    if (grid_.at(start) != CellState::Free) return p;
    const LocalSpace ls = local_free_space(grid_, plan_options());
    const Vec2 t = *target_;
    // The plan counts as done within the waypoint radius of its end, so aim
    // that much closer than the stop distance; settle for less if needed.
    const double res = grid_.meters_per_cell();
    for (const double reach : {cfg_.policy.stop_distance - cfg_.policy.waypoint_radius - res,
                               cfg_.policy.stop_distance - res}) {
      auto path = search_to_any(ls.graph, ls.to_local(start),
                                [&](Cell c) { return distance(grid_.cell_center(ls.to_grid(c)), t) <= reach; });
      if (path) {
        for (const Cell c : path->cells) p.waypoints.push_back(ls.to_grid(c));
        return p;
      }
    }
    Plan fallback = plan_path(grid_, pose_.position(), t, plan_options());
    fallback.mode = PlanMode::Approach;
    return fallback;
  }

  Plan decide();
  void dump_decision(const PromptMap& map, const DmsResult* dms, const ReasonerAnswer* target_answer,
                     const ReasonerAnswer& scores_answer, const std::optional<Vec2>& p_target,
                     const std::vector<double>& scores, const ValueMap* vmap, Vec2 goal, const Plan& plan);

  const Scene& scene_;
  const Episode& ep_;
  const Reasoner& reasoner_;
  const PipelineConfig& cfg_;
  const std::filesystem::path* debug_dir_;

  Pose pose_;
  OccupancyGrid grid_;
  CellMask exhausted_;
  std::optional<Vec2> target_;
  int idle_ = 0;
  EpisodeResult r_;
};

Plan EpisodeRunner::decide() {
  ++r_.decisions;
  const auto frontiers = detect_frontiers(grid_);
  std::vector<Vec2> points;
  std::vector<std::string> labels;
  for (const auto& o : grid_.objects()) {
    points.push_back(o.position);
    labels.push_back(o.category);
  }
  for (const auto& f : frontiers) {
    points.push_back(f.midpoint);
    labels.emplace_back();
  }
  auto markers = merge_areas(cluster_key_areas(points, cfg_.cluster), cfg_.cluster);
  label_markers(markers, labels);

  RenderInput base;
  base.grid = &grid_;
  base.markers = markers;
  base.frontiers = frontiers;
  base.pose = pose_;
  base.crop = default_crop(grid_, pose_);
  base.pixels_per_meter = cfg_.pixels_per_meter;
  base.layers = cfg_.layers;
  const PromptMap map = render_prompt_map(base);

  std::optional<DmsResult> dms;
  const PromptMap* qmap = &map;
  if (cfg_.use_dms) {
    dms = apply_dms(base, map, reasoner_, ep_.target, ep_.seed, cfg_.max_scale);
    r_.fallbacks += dms->answer.fallback;
    qmap = &dms->map;
  }

  const Rect gb = grid_.world_bounds();
  const double half = grid_.meters_per_cell() / 2.0;
  std::optional<Vec2> p_target;
  std::optional<ReasonerAnswer> target_answer;
  if (cfg_.goal_mode != GoalMode::MarkerOnly) {
    target_answer = reasoner_.query({QueryRole::PredictTarget, qmap, ep_.target, ep_.seed});
    r_.fallbacks += target_answer->fallback;
    if (const auto* t = std::get_if<TargetAnswer>(&target_answer->value)) {
      const Vec2 w = qmap->from_frame(t->position);
      if (std::isfinite(w.x) && std::isfinite(w.y)) {
        p_target = Vec2{std::clamp(w.x, gb.x + half, gb.x1() - half), std::clamp(w.y, gb.y + half, gb.y1() - half)};
      }
    }
  }

  const auto scores_answer = reasoner_.query({QueryRole::ScoreMarkers, qmap, ep_.target, ep_.seed});
  r_.fallbacks += scores_answer.fallback;
  std::vector<double> scores;
  if (const auto* s = std::get_if<ScoresAnswer>(&scores_answer.value)) scores = s->scores;
  scores.resize(qmap->markers.size(), 0.5);
  for (double& s : scores) s = std::isfinite(s) ? std::clamp(s, 0.0, 1.0) : 0.5;

  std::optional<ValueMap> vmap;
  if (cfg_.goal_mode == GoalMode::Gaussian) {
    vmap = fuse(grid_, qmap->markers, scores, p_target, cfg_.fusion);
  }
  auto select = [&](const CellMask& mask) -> std::optional<Cell> {
    try {
      switch (cfg_.goal_mode) {
        case GoalMode::Gaussian: return select_moving_location(*vmap, grid_, mask);
        case GoalMode::Max:
          return select_moving_location_max(qmap->markers, scores, p_target, cfg_.fusion.beta, grid_, mask);
        case GoalMode::MarkerOnly:
          if (qmap->markers.empty()) return std::nullopt;
          return select_moving_location_max(qmap->markers, scores, std::nullopt, cfg_.fusion.beta, grid_, mask);
      }
    } catch (const NoFreeCellError&) {
    }
    return std::nullopt;
  };

  // Moving locations the agent already stands on (or cannot get closer to)
  // are masked and the choice is repeated.
  Plan plan;
  Vec2 goal = pose_.position();
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto cell = select(exhausted_);
    if (!cell) {
      // Everything worth visiting is masked; fall back to the largest frontier.
      const Frontier* best = nullptr;
      for (const auto& f : frontiers) {
        const Cell m = grid_.world_to_cell(f.midpoint);
        if (exhausted_[grid_.index(m)]) continue;
        if (!best || f.cells.size() > best->cells.size()) best = &f;
      }
      if (!best) break;
      cell = grid_.world_to_cell(best->midpoint);
    }
    goal = grid_.cell_center(*cell);
    plan = plan_path(grid_, pose_.position(), goal, plan_options());
    const bool useful = plan.waypoints.size() > 1 &&
                        distance(grid_.cell_center(plan.waypoints.back()), pose_.position()) > cfg_.policy.waypoint_radius;
    if (useful) break;
    exhaust(goal);
    if (!plan.empty()) exhaust(grid_.cell_center(plan.waypoints.back()));
    plan = {};
  }

  if (debug_dir_) {
    dump_decision(*qmap, dms ? &*dms : nullptr, target_answer ? &*target_answer : nullptr, scores_answer, p_target,
                  scores, vmap ? &*vmap : nullptr, goal, plan);
  }
  return plan;
}

void EpisodeRunner::dump_decision(const PromptMap& map, const DmsResult* dms, const ReasonerAnswer* target_answer,
                                  const ReasonerAnswer& scores_answer, const std::optional<Vec2>& p_target,
                                  const std::vector<double>& scores, const ValueMap* vmap, Vec2 goal,
                                  const Plan& plan) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "decision_%03d", r_.decisions);
  const auto base = *debug_dir_ / stem;
  write_file(base.string() + "_prompt.png", encode_png(map.image));
  if (vmap) {
    write_file(base.string() + "_value.png",
               encode_png(value_map_overlay(*vmap, grid_, map.transform.crop, map.transform.pixels_per_meter, goal)));
  }
  json j;
  j["step"] = r_.steps;
  j["pose"] = {{"x", pose_.x}, {"y", pose_.y}, {"heading_deg", rad_to_deg(pose_.heading)}};
  j["goal_mode"] = to_string(cfg_.goal_mode);
  j["metadata"] = json::parse(prompt_sidecar(map));
  if (dms) {
    j["dms"] = {{"applied", dms->applied}, {"f_scale", dms->scaling.f_scale}, {"unclamped", dms->scaling.unclamped}};
    if (dms->center) j["dms"]["center"] = to_json(*dms->center);
    j["transcripts"]["select_region"] = dms->answer.transcript;
  }
  if (target_answer) j["transcripts"]["predict_target"] = target_answer->transcript;
  j["transcripts"]["score_markers"] = scores_answer.transcript;
  j["target_estimate"] = p_target ? to_json(*p_target) : json(nullptr);
  j["scores"] = scores;
  j["moving_location"] = to_json(goal);
  j["plan_cells"] = plan.waypoints.size();
  if (vmap) {
    json terms = json::array();
    for (const auto& t : vmap->terms) terms.push_back({{"mean", to_json(t.mean)}, {"peak", t.peak}, {"sigma", t.sigma}});
    j["value_terms"] = terms;
  }
  write_file(base.string() + ".json", j.dump(2) + "\n");
}

EpisodeResult EpisodeRunner::run() {
  if (cfg_.policy.look_around) look_around();

  const int interval = cfg_.policy.replan_interval;
  Plan plan;
  int since_plan = 0;
  int stuck_rounds = 0;
  // While the seen target cannot be approached over known space, explore
  // until this step and try again.
  int approach_hold = 0;
  while (!out_of_steps()) {
    if (target_ && distance(pose_.position(), *target_) <= cfg_.policy.stop_distance) {
      const Vec2 dv = *target_ - pose_.position();
      const double e = wrap_angle_signed(std::atan2(dv.y, dv.x) - pose_.heading);
      if (std::abs(e) <= deg_to_rad(cfg_.policy.heading_tolerance_deg) + 1e-9) {
        act(Action::Stop);
        r_.success = is_success(scene_, pose_, ep_.target, cfg_.sim);
        return std::move(r_);
      }
      act(e >= 0.0 ? Action::TurnLeft : Action::TurnRight);
      continue;
    }

    if (target_ && r_.steps >= approach_hold) {
      if (plan.mode != PlanMode::Approach || plan.empty() || since_plan >= interval || idle_ >= 12) {
        plan = approach_plan();
        since_plan = 0;
        idle_ = 0;
        if (plan.waypoints.size() <= 1) {
          approach_hold = r_.steps + interval;
          plan = {};
        }
      }
    } else if (plan.mode == PlanMode::Approach || plan.empty() || since_plan >= interval || idle_ >= 12) {
      if (idle_ >= 12 && !plan.empty()) exhaust(plan.goal);
      idle_ = 0;
      plan = decide();
      since_plan = 0;
    }

    const bool had_plan = !plan.empty();
    auto a = had_plan ? next_action(plan, pose_, grid_, cfg_.policy, cfg_.sim) : std::nullopt;
    if (!a) {
      // Plan used up (or none possible): mark the spot and look around.
      if (had_plan && plan.mode == PlanMode::Explore) exhaust(plan.goal);
      if (had_plan && plan.mode == PlanMode::Approach) approach_hold = r_.steps + interval;
      plan = {};
      if (++stuck_rounds >= 2) {
        act(Action::TurnLeft);
        stuck_rounds = 0;
      }
      continue;
    }
    stuck_rounds = 0;
    act(*a);
    ++since_plan;
  }
  return std::move(r_);
}

}  // namespace

EpisodeResult run_episode(const Scene& scene, const Episode& episode, const Reasoner& reasoner,
                          const PipelineConfig& cfg, const std::filesystem::path* debug_dir) {
  if (debug_dir) std::filesystem::create_directories(*debug_dir);
  EpisodeRunner runner(scene, episode, reasoner, cfg, debug_dir);
  EpisodeResult r = runner.run();
  if (debug_dir) {
    json j;
    j["scene"] = r.scene_id;
    j["target"] = r.target;
    j["seed"] = r.seed;
    j["success"] = r.success;
    j["steps"] = r.steps;
    j["path_length"] = r.path_length;
    j["shortest_length"] = r.shortest_length;
    j["decisions"] = r.decisions;
    j["fallbacks"] = r.fallbacks;
    json actions = json::array();
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
      const Pose& p = r.poses[i + 1];
      actions.push_back({{"action", to_string(r.actions[i])}, {"x", p.x}, {"y", p.y}, {"heading_deg", rad_to_deg(p.heading)}});
    }
    j["actions"] = actions;
    write_file(*debug_dir / "episode.json", j.dump(2) + "\n");
    // Final map state, loadable by the render command.
    write_file(*debug_dir / "final_grid.pgm", grid_to_pgm(runner.grid()));
    auto side = json::parse(grid_sidecar(runner.grid(), r.steps));
    side["pose"] = {runner.pose().x, runner.pose().y, rad_to_deg(runner.pose().heading)};
    write_file(*debug_dir / "final_grid.json", side.dump(2) + "\n");
  }
  return r;
}

}  // namespace topv

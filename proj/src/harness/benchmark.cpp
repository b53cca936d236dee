#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "topv/harness.hpp"

namespace topv {

using nlohmann::json;

double compute_sr(std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("compute_sr: no episodes");
  double s = 0.0;
  for (const auto& r : results) s += r.success ? 1.0 : 0.0;
  return 100.0 * s / static_cast<double>(results.size());
}

double compute_spl(std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("compute_spl: no episodes");
  double s = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    const double denom = std::max(r.path_length, r.shortest_length);
    // Starting inside the success disk and stopping there is a perfect path.
    s += denom > 0.0 ? r.shortest_length / denom : 1.0;
  }
  return 100.0 * s / static_cast<double>(results.size());
}

namespace {

std::string_view reasoner_name(ReasonerKind k) {
  switch (k) {
    case ReasonerKind::Heuristic: return "heuristic";
    case ReasonerKind::Scripted: return "scripted";
    case ReasonerKind::Random: return "random";
    case ReasonerKind::Remote: return "remote";
  }
  return "unknown";
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json config_to_json(const BenchmarkConfig& cfg) {
  const auto& p = cfg.pipeline;
  json j;
  j["reasoner"] = reasoner_name(cfg.reasoner);
  j["endpoint"] = cfg.endpoint;
  j["sim"] = {{"forward_step", p.sim.forward_step}, {"turn_deg", p.sim.turn_deg},
              {"tilt_deg", p.sim.tilt_deg},         {"fov_deg", p.sim.fov_deg},
              {"max_range", p.sim.max_range},       {"success_distance", p.sim.success_distance},
              {"meters_per_cell", p.sim.meters_per_cell}};
  j["grid"] = {{"width", p.grid.width}, {"height", p.grid.height}, {"meters_per_cell", p.grid.meters_per_cell}};
  j["cluster"] = {{"epsilon", p.cluster.epsilon}, {"min_pts", p.cluster.min_pts}};
  j["fusion"] = {{"beta", p.fusion.beta},
                 {"decay_level", p.fusion.decay_level},
                 {"sigma_floor", p.fusion.sigma_floor},
                 {"decay", p.fusion.decay == DecayMode::FractionOfPeak ? "fraction" : "absolute"}};
  j["policy"] = {{"step_limit", p.policy.step_limit},
                 {"replan_interval", p.policy.replan_interval},
                 {"heading_tolerance_deg", p.policy.heading_tolerance_deg},
                 {"waypoint_radius", p.policy.waypoint_radius},
                 {"lookahead", p.policy.lookahead},
                 {"stop_distance", p.policy.stop_distance},
                 {"exhausted_radius", p.policy.exhausted_radius},
                 {"clearance_radius", p.policy.clearance_radius},
                 {"look_around", p.policy.look_around}};
  j["layers"] = {{"history", p.layers.history},
                 {"obstacle", p.layers.obstacle},
                 {"textboxes", p.layers.textboxes},
                 {"coordinate", p.layers.coordinate}};
  j["pixels_per_meter"] = p.pixels_per_meter;
  j["max_scale"] = p.max_scale;
  j["dms"] = p.use_dms;
  j["goal_mode"] = to_string(p.goal_mode);
  return j;
}

BenchmarkConfig config_from_json(const json& doc, BenchmarkConfig base) {
  auto& p = base.pipeline;
  if (doc.contains("reasoner")) {
    const auto k = parse_reasoner_kind(doc["reasoner"].get<std::string>());
    if (!k) throw std::invalid_argument("config: unknown reasoner " + doc["reasoner"].get<std::string>());
    base.reasoner = *k;
  }
  read(doc, "endpoint", base.endpoint);
  read(doc, "threads", base.threads);
  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    read(s, "forward_step", p.sim.forward_step);
    read(s, "turn_deg", p.sim.turn_deg);
    read(s, "tilt_deg", p.sim.tilt_deg);
    read(s, "fov_deg", p.sim.fov_deg);
    read(s, "max_range", p.sim.max_range);
    read(s, "success_distance", p.sim.success_distance);
    read(s, "meters_per_cell", p.sim.meters_per_cell);
  }
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    read(g, "width", p.grid.width);
    read(g, "height", p.grid.height);
    read(g, "meters_per_cell", p.grid.meters_per_cell);
  }
  if (doc.contains("cluster")) {
    read(doc["cluster"], "epsilon", p.cluster.epsilon);
    read(doc["cluster"], "min_pts", p.cluster.min_pts);
  }
  if (doc.contains("fusion")) {
    const auto& f = doc["fusion"];
    read(f, "beta", p.fusion.beta);
    read(f, "decay_level", p.fusion.decay_level);
    read(f, "sigma_floor", p.fusion.sigma_floor);
    if (f.contains("decay")) {
      const auto d = f["decay"].get<std::string>();
      if (d == "fraction") {
        p.fusion.decay = DecayMode::FractionOfPeak;
      } else if (d == "absolute") {
        p.fusion.decay = DecayMode::Absolute;
      } else {
        throw std::invalid_argument("config: fusion.decay must be fraction or absolute");
      }
    }
  }
  if (doc.contains("policy")) {
    const auto& q = doc["policy"];
    read(q, "step_limit", p.policy.step_limit);
    read(q, "replan_interval", p.policy.replan_interval);
    read(q, "heading_tolerance_deg", p.policy.heading_tolerance_deg);
    read(q, "waypoint_radius", p.policy.waypoint_radius);
    read(q, "lookahead", p.policy.lookahead);
    read(q, "stop_distance", p.policy.stop_distance);
    read(q, "exhausted_radius", p.policy.exhausted_radius);
    read(q, "clearance_radius", p.policy.clearance_radius);
    read(q, "look_around", p.policy.look_around);
  }
  if (doc.contains("layers")) {
    const auto& l = doc["layers"];
    read(l, "history", p.layers.history);
    read(l, "obstacle", p.layers.obstacle);
    read(l, "textboxes", p.layers.textboxes);
    read(l, "coordinate", p.layers.coordinate);
  }
  read(doc, "pixels_per_meter", p.pixels_per_meter);
  read(doc, "max_scale", p.max_scale);
  read(doc, "dms", p.use_dms);
  if (doc.contains("goal_mode")) {
    const auto m = parse_goal_mode(doc["goal_mode"].get<std::string>());
    if (!m) throw std::invalid_argument("config: unknown goal_mode");
    p.goal_mode = *m;
  }
  if (!(p.fusion.beta > 0.0 && p.fusion.beta <= 1.0)) throw std::invalid_argument("config: beta must be in (0, 1]");
  if (!(p.fusion.decay_level > 0.0 && p.fusion.decay_level < 1.0)) {
    throw std::invalid_argument("config: decay_level must be in (0, 1)");
  }
  if (!(p.fusion.sigma_floor > 0.0)) throw std::invalid_argument("config: sigma_floor must be positive");
  if (p.policy.step_limit < 1) throw std::invalid_argument("config: step_limit must be positive");
  return base;
}

std::string config_fingerprint(const BenchmarkConfig& cfg) {
  const std::string s = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<Reasoner> make_reasoner(const BenchmarkConfig& cfg, const Scene& scene) {
  switch (cfg.reasoner) {
    case ReasonerKind::Heuristic: return std::make_unique<HeuristicReasoner>();
    case ReasonerKind::Scripted: return std::make_unique<ScriptedReasoner>(scene);
    case ReasonerKind::Random: return std::make_unique<RandomReasoner>();
    case ReasonerKind::Remote: return std::make_unique<RemoteReasoner>(RemoteConfig{cfg.endpoint});
  }
  throw std::invalid_argument("unknown reasoner kind");
}

BenchmarkReport run_benchmark(const Suite& suite, const BenchmarkConfig& cfg, const ReasonerFactory& factory) {
  if (suite.episodes.empty()) throw std::invalid_argument("run_benchmark: empty suite");
  std::map<std::string, std::size_t> by_id;
  std::vector<std::unique_ptr<Scene>> scenes;
  for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
    by_id[suite.scene_ids[i]] = i;
    scenes.push_back(std::make_unique<Scene>(suite.scenes[i], cfg.pipeline.sim.meters_per_cell));
  }

  BenchmarkReport report;
  report.rows.resize(suite.episodes.size());
  const auto n = static_cast<long>(suite.episodes.size());
#ifdef _OPENMP
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    const Episode& ep = suite.episodes[static_cast<std::size_t>(i)];
    EpisodeResult& row = report.rows[static_cast<std::size_t>(i)];
    try {
      const auto it = by_id.find(ep.scene_id);
      if (it == by_id.end()) throw std::runtime_error("unknown scene " + ep.scene_id);
      const Scene& scene = *scenes[it->second];
      auto reasoner = factory ? factory(scene) : make_reasoner(cfg, scene);
      row = run_episode(scene, ep, *reasoner, cfg.pipeline);
    } catch (const std::exception& e) {
      row = {};
      row.scene_id = ep.scene_id;
      row.target = ep.target;
      row.seed = ep.seed;
      row.error = e.what();
    }
  }

  for (const auto& r : report.rows) report.failures += r.error.empty() ? 0 : 1;
  report.sr = compute_sr(report.rows);
  report.spl = compute_spl(report.rows);
  report.config = config_to_json(cfg);
  report.fingerprint = config_fingerprint(cfg);
  return report;
}

std::string report_json(const BenchmarkReport& report) {
  json j;
  j["fingerprint"] = report.fingerprint;
  j["config"] = report.config;
  j["episodes"] = report.rows.size();
  j["sr"] = report.sr;
  j["spl"] = report.spl;
  j["failures"] = report.failures;
  auto& rows = j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row{{"scene", r.scene_id},         {"target", r.target},
             {"seed", r.seed},              {"success", r.success},
             {"steps", r.steps},            {"path_length", r.path_length},
             {"shortest_length", r.shortest_length}, {"decisions", r.decisions},
             {"fallbacks", r.fallbacks},    {"target_seen", r.target_seen}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string report_table(const BenchmarkReport& report) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "config %s  reasoner %s  goal %s  dms %s\n", report.fingerprint.c_str(),
                report.config.value("reasoner", "").c_str(), report.config.value("goal_mode", "").c_str(),
                report.config.value("dms", true) ? "on" : "off");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-4s %-10s %-12s %-7s %6s %9s %9s %5s\n", "#", "scene", "target", "success", "steps",
                "path_m", "short_m", "fb");
  os << buf;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    std::snprintf(buf, sizeof buf, "%-4zu %-10s %-12s %-7s %6d %9.2f %9.2f %5d%s\n", i, r.scene_id.c_str(),
                  r.target.c_str(), r.success ? "yes" : "no", r.steps, r.path_length, r.shortest_length, r.fallbacks,
                  r.error.empty() ? "" : ("  error: " + r.error).c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "episodes %zu  SR %.1f  SPL %.1f  errors %d\n", report.rows.size(), report.sr,
                report.spl, report.failures);
  os << buf;
  return os.str();
}

}  // namespace topv

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "topv/reasoner.hpp"
#include "topv/search.hpp"
#include "topv/topmap.hpp"

namespace topv {

std::string_view to_string(QueryRole role) {
  switch (role) {
    case QueryRole::SelectRegion: return "select_region";
    case QueryRole::PredictTarget: return "predict_target";
    case QueryRole::ScoreMarkers: return "score_markers";
  }
  return "unknown";
}

std::optional<ReasonerKind> parse_reasoner_kind(std::string_view s) {
  if (s == "heuristic") return ReasonerKind::Heuristic;
  if (s == "scripted") return ReasonerKind::Scripted;
  if (s == "random") return ReasonerKind::Random;
  if (s == "remote") return ReasonerKind::Remote;
  return std::nullopt;
}

std::string_view room_of(std::string_view category) {
  struct Entry {
    std::string_view category, room;
  };
  static constexpr Entry kRooms[] = {
      {"bed", "bedroom"},          {"nightstand", "bedroom"},    {"wardrobe", "bedroom"},
      {"dresser", "bedroom"},      {"toilet", "bathroom"},       {"sink", "bathroom"},
      {"bathtub", "bathroom"},     {"shower", "bathroom"},       {"sofa", "living_room"},
      {"tv_monitor", "living_room"}, {"coffee_table", "living_room"}, {"armchair", "living_room"},
      {"fireplace", "living_room"}, {"refrigerator", "kitchen"},  {"stove", "kitchen"},
      {"counter", "kitchen"},      {"dining_table", "dining_room"}, {"chair", "dining_room"},
      {"cabinet", "dining_room"},  {"desk", "office"},           {"bookshelf", "office"},
      {"plant", "office"},
  };
  for (const auto& e : kRooms) {
    if (e.category == category) return e.room;
  }
  return {};
}

double co_occurrence(std::string_view target, std::string_view other) {
  if (target == other) return 1.0;
  const auto a = room_of(target);
  const auto b = room_of(other);
  if (a.empty() || b.empty()) return 0.5;
  return a == b ? 0.9 : 0.1;
}

namespace {

std::string format_pair(Vec2 p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.2f, %.2f)", p.x, p.y);
  return buf;
}

std::string format_scores(const std::vector<KeyAreaMarker>& markers, const std::vector<double>& scores) {
  std::ostringstream os;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "m%d: %.3f\n", markers[i].id, scores[i]);
    os << buf;
  }
  return os.str();
}

// Largest text-box overlap between any two boxes in view, with the pair.
std::optional<std::pair<std::size_t, std::size_t>> most_overlapping_pair(const std::vector<TextBox>& boxes) {
  double best = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const double v = iou(boxes[i].rect, boxes[j].rect);
      if (v > best) {
        best = v;
        pair = {i, j};
      }
    }
  }
  return pair;
}

}  // namespace

ReasonerAnswer HeuristicReasoner::query(const ReasonerQuery& q) const {
  const PromptMap& map = *q.map;
  ReasonerAnswer a;
  switch (q.role) {
    case QueryRole::SelectRegion: {
      RegionAnswer r;
      if (auto pair = most_overlapping_pair(map.textboxes)) {
        const Vec2 mid = (map.textboxes[pair->first].object_position + map.textboxes[pair->second].object_position) / 2.0;
        r.center = map.to_frame(mid);
        a.transcript = format_pair(*r.center);
      } else {
        a.transcript = "none";
      }
      a.value = r;
      break;
    }
    case QueryRole::PredictTarget: {
      Vec2 p = map.agent.position();
      std::size_t best = 0;
      for (const auto& f : map.frontiers) {
        if (f.size > best) {
          best = f.size;
          p = f.midpoint;
        }
      }
      a.value = TargetAnswer{map.to_frame(p)};
      a.transcript = format_pair(map.to_frame(p));
      break;
    }
    case QueryRole::ScoreMarkers: {
      std::vector<double> scores;
      for (const auto& m : map.markers) {
        double s = 0.5;
        if (!m.object_labels.empty()) {
          s = 0.0;
          for (const auto& l : m.object_labels) s = std::max(s, co_occurrence(q.target_category, l));
          // Unexplored space next to unrelated objects is still worth a look.
          if (m.frontier_members > 0 && s < 0.5) s = (s + 0.5) / 2.0;
        }
        scores.push_back(s);
      }
      a.transcript = format_scores(map.markers, scores);
      a.value = ScoresAnswer{std::move(scores)};
      break;
    }
  }
  return a;
}

ScriptedReasoner::ScriptedReasoner(const Scene& scene, double score_length)
    : scene_(scene), score_length_(score_length) {}

namespace {

std::vector<Cell> success_cells(const Scene& scene, Vec2 center, double radius) {
  std::vector<Cell> cells;
  const Cell lo = scene.cell_of(center - Vec2{radius, radius});
  const Cell hi = scene.cell_of(center + Vec2{radius, radius});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      if (scene.navigable(Cell{x, y}) && distance(scene.cell_center({x, y}), center) <= radius) {
        cells.push_back({x, y});
      }
    }
  }
  return cells;
}

}  // namespace

const ScriptedReasoner::Field& ScriptedReasoner::field_for_object(std::size_t index) const {
  std::lock_guard lock(mu_);
  auto it = object_fields_.find(index);
  if (it != object_fields_.end()) return it->second;
  const auto cells = success_cells(scene_, scene_.objects()[index].position, 1.0);
  return object_fields_.emplace(index, cost_field(navigable_space(scene_), cells)).first->second;
}

const ScriptedReasoner::Field& ScriptedReasoner::field_for_category(const std::string& category) const {
  std::lock_guard lock(mu_);
  auto it = category_fields_.find(category);
  if (it != category_fields_.end()) return it->second;
  std::vector<Cell> cells;
  for (const auto& o : scene_.objects()) {
    if (o.category != category) continue;
    auto c = success_cells(scene_, o.position, 1.0);
    cells.insert(cells.end(), c.begin(), c.end());
  }
  return category_fields_.emplace(category, cost_field(navigable_space(scene_), cells)).first->second;
}

std::optional<double> ScriptedReasoner::geodesic(const Field& f, Vec2 world) const {
  // Nearest navigable cell to the query point within a small search radius.
  const Cell c0 = scene_.cell_of(world);
  std::optional<double> best;
  for (int r = 0; r <= 20 && !best; ++r) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const Cell c{c0.x + dx, c0.y + dy};
        if (!scene_.in_bounds(c)) continue;
        const auto v = f[static_cast<std::size_t>(c.y) * scene_.cols() + c.x];
        if (v == kUnreachable) continue;
        const double d = static_cast<double>(v) / kOrthCost * scene_.meters_per_cell();
        if (!best || d < *best) best = d;
      }
    }
  }
  return best;
}

ReasonerAnswer ScriptedReasoner::query(const ReasonerQuery& q) const {
  const PromptMap& map = *q.map;
  ReasonerAnswer a;
  switch (q.role) {
    case QueryRole::SelectRegion:
      a.value = RegionAnswer{};
      a.transcript = "none";
      break;
    case QueryRole::PredictTarget: {
      Vec2 best_pos = map.agent.position();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < scene_.objects().size(); ++i) {
        if (scene_.objects()[i].category != q.target_category) continue;
        const auto d = geodesic(field_for_object(i), map.agent.position());
        const double v = d.value_or(1e9 + distance(map.agent.position(), scene_.objects()[i].position));
        if (v < best) {
          best = v;
          best_pos = scene_.objects()[i].position;
        }
      }
      a.value = TargetAnswer{map.to_frame(best_pos)};
      a.transcript = format_pair(map.to_frame(best_pos));
      break;
    }
    case QueryRole::ScoreMarkers: {
      const auto& f = field_for_category(q.target_category);
      std::vector<double> scores;
      for (const auto& m : map.markers) {
        const auto d = geodesic(f, m.centroid);
        scores.push_back(d ? std::exp(-*d / score_length_) : 0.0);
      }
      a.transcript = format_scores(map.markers, scores);
      a.value = ScoresAnswer{std::move(scores)};
      break;
    }
  }
  return a;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t quantize(double v) { return static_cast<std::uint64_t>(std::llround(v * 1000.0)); }

}  // namespace

ReasonerAnswer RandomReasoner::query(const ReasonerQuery& q) const {
  const PromptMap& map = *q.map;
  std::uint64_t h = mix(q.episode_seed, static_cast<std::uint64_t>(q.role));
  h = mix(h, quantize(map.agent.x));
  h = mix(h, quantize(map.agent.y));
  h = mix(h, quantize(map.agent.heading));
  h = mix(h, map.markers.size());
  for (char c : q.target_category) h = mix(h, static_cast<unsigned char>(c));
  std::mt19937_64 rng(h);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Rect& crop = map.transform.crop;
  auto random_point = [&] {
    const double x = crop.x + unit(rng) * crop.w;
    const double y = crop.y + unit(rng) * crop.h;
    return map.to_frame({x, y});
  };

  ReasonerAnswer a;
  switch (q.role) {
    case QueryRole::SelectRegion: {
      RegionAnswer r;
      if (unit(rng) < 0.5) r.center = random_point();
      a.transcript = r.center ? format_pair(*r.center) : "none";
      a.value = r;
      break;
    }
    case QueryRole::PredictTarget: {
      const Vec2 p = random_point();
      a.value = TargetAnswer{p};
      a.transcript = format_pair(p);
      break;
    }
    case QueryRole::ScoreMarkers: {
      std::vector<double> scores;
      for (std::size_t i = 0; i < map.markers.size(); ++i) scores.push_back(unit(rng));
      a.transcript = format_scores(map.markers, scores);
      a.value = ScoresAnswer{std::move(scores)};
      break;
    }
  }
  return a;
}

}  // namespace topv

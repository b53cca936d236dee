#include <algorithm>
#include <limits>
#include <numeric>

#include "topv/avpg.hpp"

namespace topv {

namespace {

bool position_less(const Vec2& a, const Vec2& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

void finalize(KeyAreaMarker& m, std::span<const Vec2> points) {
  std::sort(m.member_indices.begin(), m.member_indices.end(), [&](std::size_t a, std::size_t b) {
    if (points[a] == points[b]) return a < b;
    return position_less(points[a], points[b]);
  });
  m.members.clear();
  for (auto i : m.member_indices) m.members.push_back(points[i]);
  m.centroid = mean_of(m.members);
}

void sort_and_number(std::vector<KeyAreaMarker>& markers) {
  std::sort(markers.begin(), markers.end(), [](const KeyAreaMarker& a, const KeyAreaMarker& b) {
    return position_less(a.members.front(), b.members.front());
  });
  for (std::size_t i = 0; i < markers.size(); ++i) markers[i].id = static_cast<int>(i) + 1;
}

}  // namespace

Vec2 mean_of(std::span<const Vec2> points) {
  Vec2 sum;
  for (const auto& p : points) sum = sum + p;
  return points.empty() ? sum : sum / static_cast<double>(points.size());
}

std::vector<KeyAreaMarker> cluster_key_areas(std::span<const Vec2> points, const ClusterConfig& cfg) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  const double eps2 = cfg.epsilon * cfg.epsilon;
  auto near = [&](std::size_t i, std::size_t j) { return (points[i] - points[j]).squared_norm() <= eps2; };

  std::vector<std::uint8_t> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += near(i, j) ? 1 : 0;
    core[i] = count >= cfg.min_pts ? 1 : 0;
  }

  // Density-connected components of the dense points.
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> area(n, kNone);
  std::size_t n_areas = 0;
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (!core[s] || area[s] != kNone) continue;
    area[s] = n_areas;
    queue.assign(1, s);
    while (!queue.empty()) {
      const auto i = queue.back();
      queue.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (core[j] && area[j] == kNone && near(i, j)) {
          area[j] = n_areas;
          queue.push_back(j);
        }
      }
    }
    ++n_areas;
  }

  // Border points follow their nearest dense point; ties go to the dense
  // point with the smaller position so the outcome is order-free.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    std::size_t best = kNone;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!core[j] || !near(i, j)) continue;
      const double d2 = (points[i] - points[j]).squared_norm();
      if (d2 < best_d2 || (d2 == best_d2 && position_less(points[j], points[best]))) {
        best_d2 = d2;
        best = j;
      }
    }
    if (best != kNone) area[i] = area[best];
  }

  std::vector<KeyAreaMarker> markers(n_areas);
  for (std::size_t i = 0; i < n; ++i) {
    if (area[i] != kNone) markers[area[i]].member_indices.push_back(i);
  }
  for (auto& m : markers) finalize(m, points);
  sort_and_number(markers);
  return markers;
}

std::vector<KeyAreaMarker> merge_areas(std::vector<KeyAreaMarker> markers, const ClusterConfig& cfg) {
  std::sort(markers.begin(), markers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const double eps2 = cfg.epsilon * cfg.epsilon;
  for (;;) {
    // Group markers by the transitive closure of "centroids within epsilon".
    const std::size_t n = markers.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((markers[i].centroid - markers[j].centroid).squared_norm() > eps2) continue;
        any = true;
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
    if (!any) break;

    // Each group keeps the slot of its lowest id.
    std::vector<KeyAreaMarker> next;
    std::vector<std::size_t> slot(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = find(i);
      if (slot[r] == n) {
        slot[r] = next.size();
        next.push_back(std::move(markers[i]));
        continue;
      }
      auto& into = next[slot[r]];
      into.members.insert(into.members.end(), markers[i].members.begin(), markers[i].members.end());
      into.member_indices.insert(into.member_indices.end(), markers[i].member_indices.begin(),
                                 markers[i].member_indices.end());
    }
    for (auto& m : next) {
      std::vector<std::size_t> order(m.members.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (m.members[a] == m.members[b]) return m.member_indices[a] < m.member_indices[b];
        return position_less(m.members[a], m.members[b]);
      });
      std::vector<Vec2> members;
      std::vector<std::size_t> indices;
      for (auto k : order) {
        members.push_back(m.members[k]);
        indices.push_back(m.member_indices[k]);
      }
      m.members = std::move(members);
      m.member_indices = std::move(indices);
      m.centroid = mean_of(m.members);
    }
    markers = std::move(next);
  }
  for (std::size_t i = 0; i < markers.size(); ++i) markers[i].id = static_cast<int>(i) + 1;
  return markers;
}

void label_markers(std::vector<KeyAreaMarker>& markers, std::span<const std::string> labels) {
  for (auto& m : markers) {
    m.object_labels.clear();
    m.frontier_members = 0;
    for (auto i : m.member_indices) {
      if (i >= labels.size() || labels[i].empty()) {
        ++m.frontier_members;
      } else {
        m.object_labels.push_back(labels[i]);
      }
    }
  }
}

}  // namespace topv

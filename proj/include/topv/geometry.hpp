#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>

namespace topv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Integer grid coordinate. `x` is the column, `y` the row; row 0 is the
// southernmost row so that +y in cells matches +y in meters.
struct Cell {
  int x = 0;
  int y = 0;

  constexpr bool operator==(const Cell&) const = default;
  constexpr auto operator<=>(const Cell& o) const {
    if (auto c = y <=> o.y; c != 0) return c;
    return x <=> o.x;
  }
};

// Axis-aligned rectangle given by its lower-left corner and extent.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  constexpr bool operator==(const Rect&) const = default;

  constexpr double x1() const { return x + w; }
  constexpr double y1() const { return y + h; }
  constexpr double area() const { return w * h; }
  constexpr Vec2 center() const { return {x + w / 2.0, y + h / 2.0}; }

  // Half-open containment: [x, x+w) x [y, y+h).
  constexpr bool contains(const Vec2& p) const {
    return p.x >= x && p.x < x + w && p.y >= y && p.y < y + h;
  }
  // Closed containment, used for validation of positions against bounds.
  constexpr bool contains_closed(const Vec2& p) const {
    return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
  }
  constexpr bool contains(const Rect& r) const {
    return r.x >= x && r.y >= y && r.x1() <= x1() && r.y1() <= y1();
  }
};

constexpr Rect intersect(const Rect& a, const Rect& b) {
  const double x0 = std::max(a.x, b.x);
  const double y0 = std::max(a.y, b.y);
  const double x1 = std::min(a.x1(), b.x1());
  const double y1 = std::min(a.y1(), b.y1());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0.0, 0.0};
  return {x0, y0, x1 - x0, y1 - y0};
}

constexpr double iou(const Rect& a, const Rect& b) {
  const double inter = intersect(a, b).area();
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

// Wraps to [0, 2pi).
inline double wrap_angle_positive(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

// Wraps to (-pi, pi].
inline double wrap_angle_signed(double a) {
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

}  // namespace topv

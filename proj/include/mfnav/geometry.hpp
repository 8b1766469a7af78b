#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mfnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squaredNorm() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // normalized to (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

struct RobotState {
  Pose2D pose;
  double v = 0.0;      // body-frame linear speed, m/s
  double omega = 0.0;  // angular rate, rad/s
};

struct ControlCommand {
  double v = 0.0;
  double omega = 0.0;
};

/// Distance from point to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

/// Signed distance from point to a convex CCW polygon boundary; negative inside.
inline double point_polygon_signed_distance(const Vec2& p, const std::vector<Vec2>& verts) {
  double min_edge = std::numeric_limits<double>::infinity();
  bool inside = true;
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = verts[i];
    const Vec2& b = verts[(i + 1) % n];
    min_edge = std::min(min_edge, point_segment_distance(p, a, b));
    Vec2 e = b - a;
    if (e.x * (p.y - a.y) - e.y * (p.x - a.x) < 0.0) inside = false;
  }
  return inside ? -min_edge : min_edge;
}

/// First intersection parameter t >= 0 of ray o + t*d with circle (c, r), or -1.
inline double ray_circle_intersect(const Vec2& o, const Vec2& d, const Vec2& c, double r) {
  Vec2 oc = o - c;
  double b = oc.dot(d);
  double disc = b * b - (oc.squaredNorm() - r * r);
  if (disc < 0.0) return -1.0;
  double s = std::sqrt(disc);
  double t0 = -b - s;
  if (t0 >= 0.0) return t0;
  double t1 = -b + s;
  return t1 >= 0.0 ? t1 : -1.0;
}

/// First intersection parameter t >= 0 of ray o + t*d with segment [a, b], or -1.
inline double ray_segment_intersect(const Vec2& o, const Vec2& d, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double denom = d.x * ab.y - d.y * ab.x;
  if (std::abs(denom) < 1e-15) return -1.0;
  Vec2 ao = a - o;
  double t = (ao.x * ab.y - ao.y * ab.x) / denom;
  double u = (ao.x * d.y - ao.y * d.x) / denom;
  if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
  return -1.0;
}

}  // namespace mfnav

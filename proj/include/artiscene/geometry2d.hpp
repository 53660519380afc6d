// artiscene - articulated 3D scene graphs from point trajectories
//
// Planar helpers for the matching cost: convex hull, point-in-polygon and
// axis-aligned boxes.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "artiscene/se3.hpp"

namespace artiscene {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Andrew's monotone chain. Counter-clockwise (in a y-up frame), without
/// collinear points; fewer than three vertices means a degenerate hull.
inline std::vector<Vec2> convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Vec2> hull(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], q) <= 0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Closed-set membership for a convex polygon from convex_hull.
inline bool inside_convex(std::span<const Vec2> hull, const Vec2& q) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, q) < 0) return false;
  }
  return true;
}

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  [[nodiscard]] double volume() const {
    const Vec3 d = (max - min).cwiseMax(0.0);
    return d.x() * d.y() * d.z();
  }
  [[nodiscard]] bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
};

inline Aabb bounding_box(std::span<const Vec3> points) {
  Aabb b;
  if (points.empty()) return b;
  b.min = b.max = points.front();
  for (const auto& p : points) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  }
  return b;
}

inline double aabb_iou(const Aabb& a, const Aabb& b) {
  const Vec3 lo = a.min.cwiseMax(b.min);
  const Vec3 hi = a.max.cwiseMin(b.max);
  const Vec3 d = (hi - lo).cwiseMax(0.0);
  const double inter = d.x() * d.y() * d.z();
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace artiscene

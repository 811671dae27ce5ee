#include "mab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mab {

namespace {
constexpr double kPi = 3.14159265358979323846;
const Vec2 kCorner{1.0, 1.0};
const Vec2 kArcEndRight{1.0, 0.0};
const Vec2 kArcEndTop{0.0, 1.0};
}  // namespace

bool DomainGeometry::contains(const Vec2& p, double tol) const {
  if (p.norm2() < 1.0 + tol) return true;
  return p.x > -tol && p.x < 1.0 + tol && p.y > -tol && p.y < 1.0 + tol;
}

double DomainGeometry::boundary_dist2(const Vec2& p, Vec2* closest) const {
  double best = std::numeric_limits<double>::max();
  Vec2 bp;

  // Circular arc: the part of the unit circle outside the open first
  // quadrant. The radial projection lands on the arc unless p points into the
  // open first quadrant, in which case the arc endpoints compete.
  const double r = p.norm();
  if (p.x > 0.0 && p.y > 0.0) {
    for (const Vec2& e : {kArcEndRight, kArcEndTop}) {
      const double d2 = (p - e).norm2();
      if (d2 < best) { best = d2; bp = e; }
    }
  } else {
    Vec2 q = r > 0.0 ? p / r : Vec2{-1.0, 0.0};
    const double d2 = (p - q).norm2();
    if (d2 < best) { best = d2; bp = q; }
  }

  // Square edges x = 1 and y = 1.
  Vec2 foot;
  double d2 = point_segment_dist2(p, kArcEndRight, kCorner, &foot);
  if (d2 < best) { best = d2; bp = foot; }
  d2 = point_segment_dist2(p, kCorner, kArcEndTop, &foot);
  if (d2 < best) { best = d2; bp = foot; }

  if (closest) *closest = bp;
  return best;
}

double DomainGeometry::signed_distance(const Vec2& p) const {
  const double d = std::sqrt(boundary_dist2(p, nullptr));
  return contains(p) ? -d : d;
}

Vec2 DomainGeometry::project_to_boundary(const Vec2& p) const {
  Vec2 q;
  boundary_dist2(p, &q);
  return q;
}

double DomainGeometry::ray_exit(const Vec2& p, const Vec2& dir) const {
  if (!contains(p, 1e-13)) throw std::invalid_argument("ray_exit: start point outside the domain");
  double best = std::numeric_limits<double>::max();

  // Circle |p + t dir| = 1, keeping hits whose angle lies on the arc.
  const double a = dir.norm2();
  const double b = 2.0 * p.dot(dir);
  const double c = p.norm2() - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0 && a > 0.0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
      if (t < -1e-13) continue;
      const Vec2 q = p + dir * t;
      if (q.x > 1e-13 && q.y > 1e-13) continue;  // open first-quadrant arc is not boundary
      best = std::min(best, std::max(t, 0.0));
    }
  }

  // Square edges x = 1 (y in [0,1]) and y = 1 (x in [0,1]).
  if (dir.x > 1e-15) {
    const double t = (1.0 - p.x) / dir.x;
    const double y = p.y + t * dir.y;
    if (t >= -1e-13 && y >= -1e-12 && y <= 1.0 + 1e-12) best = std::min(best, std::max(t, 0.0));
  }
  if (dir.y > 1e-15) {
    const double t = (1.0 - p.y) / dir.y;
    const double x = p.x + t * dir.x;
    if (t >= -1e-13 && x >= -1e-12 && x <= 1.0 + 1e-12) best = std::min(best, std::max(t, 0.0));
  }

  if (best == std::numeric_limits<double>::max())
    throw std::runtime_error("ray_exit: no boundary intersection found");
  return best;
}

}  // namespace mab

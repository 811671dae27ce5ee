#include "mab/geometry.hpp"

#include <algorithm>

namespace mab {

double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* foot, double* t) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const Vec2 q = a + ab * s;
  if (foot) *foot = q;
  if (t) *t = s;
  return (p - q).norm2();
}

}  // namespace mab

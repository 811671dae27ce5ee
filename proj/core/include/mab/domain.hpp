#ifndef MAB_DOMAIN_HPP
#define MAB_DOMAIN_HPP

#include "mab/geometry.hpp"

namespace mab {

// The computational domain is the union of the open unit disk and the open
// unit square (0,1)^2. The union is convex; the flat square edges x = 1 and
// y = 1 make it non-strictly convex. Its boundary consists of the circular
// arc between (0,1) and (1,0) (going through (-1,0)) and the two square
// edges meeting at the corner (1,1).
class DomainGeometry {
 public:
  bool contains(const Vec2& p, double tol = 0.0) const;

  /// Negative inside, zero on the boundary, positive outside.
  double signed_distance(const Vec2& p) const;

  /// Closest point on the domain boundary.
  Vec2 project_to_boundary(const Vec2& p) const;

  /// Largest t >= 0 with p + t*dir still inside the closed domain.
  /// Requires p inside and |dir| = 1.
  double ray_exit(const Vec2& p, const Vec2& dir) const;

  /// Diameter of the domain: corner (1,1) to the antipodal circle point.
  double diameter() const { return 1.0 + std::sqrt(2.0); }

 private:
  // Distance to the three boundary pieces: arc (angle in [pi/2, 2pi]),
  // segment (1,0)-(1,1), segment (1,1)-(0,1).
  double boundary_dist2(const Vec2& p, Vec2* closest) const;
};

}  // namespace mab

#endif

#ifndef MAB_GEOMETRY_HPP
#define MAB_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace mab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct SymMat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  SymMat2() = default;
  SymMat2(double m11, double m12, double m22) : a11(m11), a12(m12), a22(m22) {}

  static SymMat2 identity() { return {1.0, 0.0, 1.0}; }
  static SymMat2 diag(double d1, double d2) { return {d1, 0.0, d2}; }

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a12; }

  /// Frobenius inner product A:B.
  double ddot(const SymMat2& b) const {
    return a11 * b.a11 + 2.0 * a12 * b.a12 + a22 * b.a22;
  }

  /// Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const {
    const double mean = 0.5 * (a11 + a22);
    const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a12);
    return {mean - disc, mean + disc};
  }

  SymMat2 operator+(const SymMat2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  SymMat2 operator-(const SymMat2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
  SymMat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }

  double frobenius_norm() const {
    return std::sqrt(a11 * a11 + 2.0 * a12 * a12 + a22 * a22);
  }
};

/// Squared distance from p to segment [a, b]; foot stored in *foot and its
/// segment parameter in *t when requested.
double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b,
                           Vec2* foot = nullptr, double* t = nullptr);

/// Twice the signed area of triangle (a, b, c); positive for CCW order.
inline double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}

}  // namespace mab

#endif

#ifndef MAB_MESH_HPP
#define MAB_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mab/domain.hpp"
#include "mab/geometry.hpp"

namespace mab {

/// Location of a point inside a mesh: triangle index plus barycentric
/// coordinates (non-negative, summing to one).
struct FePoint {
  int tri = -1;
  std::array<double, 3> bary = {0.0, 0.0, 0.0};
};

/// Conforming triangulation of the circle/square union domain. All boundary
/// nodes lie on the domain boundary and the triangulated polygon is a convex
/// subset of the domain. Immutable after construction; queries are pure and
/// safe to run concurrently.
class Mesh {
 public:
  // -- topology and geometry ------------------------------------------------
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_interior() const { return static_cast<int>(interior_nodes_.size()); }
  int num_boundary() const { return num_nodes() - num_interior(); }

  const Vec2& node(int i) const { return nodes_[i]; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  bool is_boundary(int i) const { return boundary_flag_[i] != 0; }
  const std::array<int, 3>& tri(int t) const { return tris_[t]; }
  const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

  /// Interior nodes in ascending node order.
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }
  /// Position of node i within interior_nodes(), or -1 for boundary nodes.
  int interior_index(int i) const { return interior_index_[i]; }

  /// Triangles incident to node i.
  const int* node_tris_begin(int i) const { return node_tris_.data() + node_tris_offset_[i]; }
  const int* node_tris_end(int i) const { return node_tris_.data() + node_tris_offset_[i + 1]; }

  struct BoundaryEdge {
    int a = 0, b = 0;  // node ids
    int tri = -1;      // the single incident triangle
  };
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  double tri_diameter(int t) const { return tri_diam_[t]; }
  double tri_area(int t) const { return tri_area_[t]; }
  double h_max() const { return h_max_; }
  double h_avg() const { return h_avg_; }

  const DomainGeometry& geometry() const { return geom_; }

  // -- queries ---------------------------------------------------------------

  /// Containing triangle and barycentric coordinates. Points outside the
  /// triangulated polygon are first clamped onto it; throws std::runtime_error
  /// if no triangle can be found even after clamping.
  FePoint locate_point(const Vec2& x) const;

  /// x itself when inside the triangulated polygon, otherwise the nearest
  /// point on its boundary edges.
  Vec2 clamp_to_domain(const Vec2& x) const;

  /// True if x lies in some triangle (within tol on barycentric coordinates).
  bool inside_mesh(const Vec2& x, double tol = 1e-12) const;

  Vec2 point_of(const FePoint& p) const;

  // -- text format: "J T" header, J lines "x y flag", T lines "i j k" --------
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
  static Mesh read(std::istream& is, const DomainGeometry& geom = DomainGeometry());
  static Mesh read_file(const std::string& path, const DomainGeometry& geom = DomainGeometry());

  /// Builds a mesh from raw arrays; derived data (adjacency, boundary edges,
  /// size measures, point-location grid) is computed here and node boundary
  /// flags are validated against edge incidence.
  static Mesh from_raw(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> tris,
                       std::vector<uint8_t> boundary_flag, const DomainGeometry& geom);

 private:
  friend Mesh build_domain_mesh(const DomainGeometry&, double);
  friend Mesh refine_uniform(const Mesh&);

  void finalize();
  bool try_locate(const Vec2& x, double tol, FePoint* out) const;

  DomainGeometry geom_;
  std::vector<Vec2> nodes_;
  std::vector<uint8_t> boundary_flag_;
  std::vector<std::array<int, 3>> tris_;

  std::vector<int> interior_nodes_;
  std::vector<int> interior_index_;
  std::vector<int> node_tris_offset_;
  std::vector<int> node_tris_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> tri_diam_;
  std::vector<double> tri_area_;
  double h_max_ = 0.0;
  double h_avg_ = 0.0;

  // uniform bucket grid over the bounding box for point location
  int grid_res_ = 0;
  Vec2 grid_lo_, grid_hi_;
  std::vector<int> cell_offset_;
  std::vector<int> cell_tris_;
};

/// Quasi-uniform mesh of the circle/square union with all boundary nodes on
/// the domain boundary. Structured square grid blended with ring fans over
/// the three circular quadrants, then Laplacian-smoothed in the interior.
/// Throws std::invalid_argument when target_h leaves fewer than 4 interior
/// nodes.
Mesh build_domain_mesh(const DomainGeometry& geom, double target_h);

/// Red refinement: each triangle is split into four via edge midpoints;
/// midpoints of boundary edges are projected back onto the domain boundary.
Mesh refine_uniform(const Mesh& mesh);

/// Continuous piecewise-linear function given by nodal values.
struct FeFunction {
  const Mesh* mesh = nullptr;
  std::vector<double> values;

  FeFunction() = default;
  explicit FeFunction(const Mesh& m, double fill = 0.0)
      : mesh(&m), values(m.num_nodes(), fill) {}

  double eval_fe(const FePoint& p) const {
    const auto& t = mesh->tri(p.tri);
    return p.bary[0] * values[t[0]] + p.bary[1] * values[t[1]] + p.bary[2] * values[t[2]];
  }
};

/// Evaluates fun at x; points outside the triangulated polygon are clamped
/// onto it first, which realizes the constant-normal extension.
double eval_p1(const FeFunction& fun, const Vec2& x);

/// Constant gradient of fun on triangle t.
Vec2 tri_gradient(const FeFunction& fun, int t);

/// Nodal interpolant of f.
template <typename F>
FeFunction interpolate(const Mesh& mesh, F&& f) {
  FeFunction u(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) u.values[i] = f(mesh.node(i));
  return u;
}

}  // namespace mab

#endif

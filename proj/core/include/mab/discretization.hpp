#ifndef MAB_DISCRETIZATION_HPP
#define MAB_DISCRETIZATION_HPP

#include <Eigen/Sparse>
#include <functional>
#include <utility>
#include <vector>

#include "mab/controls.hpp"
#include "mab/mesh.hpp"

namespace mab {

using ScalarField = std::function<double(const Vec2&)>;

/// Stencil scaling parameters: away from the boundary the stencil radius is
/// k = m * h_avg; towards the boundary it is truncated symmetrically so both
/// probes stay inside the triangulated polygon. min_k (default h_avg / 4 when
/// non-positive) floors the truncation against degenerate stencils.
struct StencilConfig {
  double m = 8.0;
  double min_k = 0.0;

  double resolved_min_k(const Mesh& mesh) const {
    return min_k > 0.0 ? min_k : 0.25 * mesh.h_avg();
  }
};

/// One control per interior node, stored as indices into the active grid.
struct Policy {
  std::vector<int> control;  // size = mesh.num_interior()
};

/// The distinct stencil line directions required by a control grid: each
/// control probes along its two eigenvector lines, and with an even angle
/// count those lines coincide pairwise across controls.
struct DirectionSet {
  std::vector<Vec2> dirs;                      // unit vectors, angles in [0, pi)
  std::vector<std::pair<int, int>> of_control; // per control: (dir of sigma1, dir of sigma2)
  std::vector<double> split;                   // per control: eigenvalue split a
  std::vector<double> sqrt_det;                // per control: sqrt(a (1-a))

  int size() const { return static_cast<int>(dirs.size()); }
};

DirectionSet build_direction_set(const ControlGrid& grid);

/// Per interior node and line direction: distance to the mesh boundary along
/// both rays, capped at t_cap (entries >= t_cap are stored as t_cap).
/// Independent of the stencil factor m, so it is shared across m sweeps.
struct StencilGeometry {
  const Mesh* mesh = nullptr;
  DirectionSet dirs;
  double t_cap = 0.0;
  // row-major [interior index][direction]: min distance over both rays
  std::vector<double> exit_dist;

  double exit(int interior_idx, int dir) const {
    return exit_dist[static_cast<size_t>(interior_idx) * dirs.size() + dir];
  }
};

StencilGeometry build_stencil_geometry(const Mesh& mesh, DirectionSet dirs, double t_cap);

/// Cached probe data for one stencil factor m: per interior node and
/// direction, the truncated length k and the finite element location of both
/// probe points x +- k sigma.
class StencilTable {
 public:
  StencilTable() = default;
  StencilTable(const StencilGeometry& geo, const StencilConfig& cfg);

  const Mesh& mesh() const { return *geo_->mesh; }
  const DirectionSet& dirs() const { return geo_->dirs; }
  double m() const { return cfg_.m; }

  double k(int interior_idx, int dir) const { return k_[idx(interior_idx, dir)]; }

  /// Value of the FE function at the +/- probe of (node, dir).
  double probe_plus(const FeFunction& u, int interior_idx, int dir) const {
    return probe_value(u, 2 * idx(interior_idx, dir));
  }
  double probe_minus(const FeFunction& u, int interior_idx, int dir) const {
    return probe_value(u, 2 * idx(interior_idx, dir) + 1);
  }

  /// Second difference [u(x-k s) - 2 s_val + u(x+k s)] / k^2 along dir.
  double second_difference(const FeFunction& u, double s_val, int interior_idx, int dir) const {
    const size_t e = idx(interior_idx, dir);
    const double kk = k_[e];
    return (probe_value(u, 2 * e) + probe_value(u, 2 * e + 1) - 2.0 * s_val) / (kk * kk);
  }

  FePoint probe_point_plus(int interior_idx, int dir) const { return probe_fe(2 * idx(interior_idx, dir)); }
  FePoint probe_point_minus(int interior_idx, int dir) const { return probe_fe(2 * idx(interior_idx, dir) + 1); }

 private:
  size_t idx(int interior_idx, int dir) const {
    return static_cast<size_t>(interior_idx) * geo_->dirs.size() + dir;
  }
  double probe_value(const FeFunction& u, size_t p) const {
    const auto& t = geo_->mesh->tri(probe_tri_[p]);
    const double b0 = probe_b_[2 * p], b1 = probe_b_[2 * p + 1];
    return b0 * u.values[t[0]] + b1 * u.values[t[1]] + (1.0 - b0 - b1) * u.values[t[2]];
  }
  FePoint probe_fe(size_t p) const {
    FePoint fp;
    fp.tri = probe_tri_[p];
    fp.bary = {probe_b_[2 * p], probe_b_[2 * p + 1], 1.0 - probe_b_[2 * p] - probe_b_[2 * p + 1]};
    return fp;
  }

  friend struct PolicySystemBuilder;
  const StencilGeometry* geo_ = nullptr;
  StencilConfig cfg_;
  std::vector<double> k_;        // [interior][dir]
  std::vector<int> probe_tri_;   // 2 probes per (interior, dir): +, -
  std::vector<double> probe_b_;  // 2 barycentric coords per probe
};

/// Truncated stencil length at interior node `node` along +-sigma: the
/// minimum of m*h_avg and the exit distances of both rays, floored at
/// min(min_k, exit distance). Throws std::invalid_argument for boundary
/// nodes.
double stencil_size(const Mesh& mesh, int node, const Vec2& sigma, const StencilConfig& cfg);

/// Stencil of one (interior node, control) pair, exposed for inspection.
struct StencilRow {
  double k1 = 0.0, k2 = 0.0;          // lengths along sigma1, sigma2
  FePoint plus1, minus1, plus2, minus2;
  double lambda1 = 0.0, lambda2 = 0.0;
};

StencilRow build_stencil_row(const Mesh& mesh, int node, const Control& c, const StencilConfig& cfg);

/// The affine per-policy system: row i applies the negated weighted second
/// differences of the policy control at interior nodes and the identity at
/// boundary nodes; b carries f(x_i) sqrt(det B_i) at interior nodes and
/// -g(x_i) at boundary nodes. The discrete problem is A v = -b. A is an
/// invertible M-matrix: positive diagonal, non-positive off-diagonal entries.
struct PolicySystem {
  Eigen::SparseMatrix<double> A;  // J x J
  Eigen::VectorXd b;              // J
};

PolicySystem assemble_policy_system(const Mesh& mesh, const Policy& policy,
                                    const ControlGrid& grid, const ScalarField& f,
                                    const ScalarField& g, const StencilConfig& cfg);

/// Same assembly on a prebuilt stencil table (shared across Howard iterations).
PolicySystem assemble_policy_system(const StencilTable& table, const Policy& policy,
                                    const ControlGrid& grid, const std::vector<double>& f_interior,
                                    const std::vector<double>& g_nodes);

/// Discrete Hamiltonian at one node: at interior nodes the sup over the
/// control grid of the negated weighted second differences (with s replacing
/// u(x_i)) plus f(x_i) sqrt(det B); at boundary nodes s - g(x_i). Returns the
/// value and the argmax control index (lowest index wins ties; boundary nodes
/// report the isotropic control).
std::pair<double, int> discrete_hamiltonian_at_node(const Mesh& mesh, const FeFunction& u,
                                                    int node, double s, const ControlGrid& grid,
                                                    const ScalarField& f, const ScalarField& g,
                                                    const StencilConfig& cfg);

/// Fast path on a prebuilt table; node given by interior index.
std::pair<double, int> discrete_hamiltonian_interior(const StencilTable& table,
                                                     const ControlGrid& grid, const FeFunction& u,
                                                     int interior_idx, double s, double f_value);

/// Residual vector of the full scheme at u: component i is the discrete
/// Hamiltonian at node i with s = u(x_i).
std::vector<double> scheme_residual(const Mesh& mesh, const FeFunction& u, const ControlGrid& grid,
                                    const ScalarField& f, const ScalarField& g,
                                    const StencilConfig& cfg);

/// Discrete Hamiltonian with probes evaluated exactly on a smooth function
/// instead of by interpolation: sup over the grid of
/// -sum_j lambda_j [phi(x-k sigma_j) - 2 phi(x) + phi(x+k sigma_j)]/k^2
/// + f sqrt(det B). Used for consistency studies.
std::pair<double, int> hamiltonian_on_function(const ScalarField& phi, const Vec2& x, double k,
                                               const ControlGrid& grid, double f);

}  // namespace mab

#endif

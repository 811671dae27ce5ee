#include "mab/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mab/parallel.hpp"

namespace mab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  if (a > kPi - 1e-12) a = 0.0;
  return a;
}

// Smallest |t| over ray/segment intersections of the line x + t*d with the
// mesh boundary edges listed in `edges`. Inside a convex boundary polygon the
// line exits exactly once per direction, so the nearest hit on either side is
// the two-sided truncation distance.
double line_exit_distance(const Mesh& mesh, const Vec2& x, const Vec2& d,
                          const std::vector<int>& edges, double cap) {
  double best = cap;
  for (int ei : edges) {
    const auto& e = mesh.boundary_edges()[ei];
    const Vec2& p = mesh.node(e.a);
    const Vec2 seg = mesh.node(e.b) - p;
    const double denom = d.cross(seg);
    if (std::abs(denom) < 1e-15) continue;
    const Vec2 px = p - x;
    const double s = px.cross(d) / denom;
    if (s < -1e-10 || s > 1.0 + 1e-10) continue;
    const double t = std::abs(px.cross(seg) / denom);
    best = std::min(best, t);
  }
  return best;
}

std::vector<int> all_boundary_edges(const Mesh& mesh) {
  std::vector<int> ids(mesh.boundary_edges().size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

}  // namespace

DirectionSet build_direction_set(const ControlGrid& grid) {
  DirectionSet ds;
  std::vector<double> angles;
  angles.reserve(2 * grid.size());
  for (const Control& c : grid.controls) {
    angles.push_back(wrap_angle(c.theta));
    angles.push_back(wrap_angle(c.theta + 0.5 * kPi));
  }
  std::sort(angles.begin(), angles.end());
  std::vector<double> uniq;
  for (double a : angles)
    if (uniq.empty() || a - uniq.back() > 1e-12) uniq.push_back(a);

  ds.dirs.reserve(uniq.size());
  for (double a : uniq) ds.dirs.push_back({std::cos(a), std::sin(a)});
  auto find = [&uniq](double a) {
    const auto it = std::lower_bound(uniq.begin(), uniq.end(), a - 1e-9);
    return static_cast<int>(it - uniq.begin());
  };
  ds.of_control.reserve(grid.size());
  ds.split.reserve(grid.size());
  ds.sqrt_det.reserve(grid.size());
  for (const Control& c : grid.controls) {
    ds.of_control.emplace_back(find(wrap_angle(c.theta)), find(wrap_angle(c.theta + 0.5 * kPi)));
    ds.split.push_back(c.a);
    ds.sqrt_det.push_back(c.sqrt_det());
  }
  return ds;
}

StencilGeometry build_stencil_geometry(const Mesh& mesh, DirectionSet dirs, double t_cap) {
  StencilGeometry geo;
  geo.mesh = &mesh;
  geo.dirs = std::move(dirs);
  geo.t_cap = t_cap;
  const int n0 = mesh.num_interior();
  const int nd = geo.dirs.size();
  geo.exit_dist.assign(static_cast<size_t>(n0) * nd, t_cap);

  // Edge centers/radii for a cheap per-node candidate filter: only edges
  // within t_cap of the node can truncate its stencil.
  const auto& bedges = mesh.boundary_edges();
  std::vector<Vec2> centers(bedges.size());
  std::vector<double> radii(bedges.size());
  for (size_t i = 0; i < bedges.size(); ++i) {
    const Vec2 &a = mesh.node(bedges[i].a), &b = mesh.node(bedges[i].b);
    centers[i] = (a + b) * 0.5;
    radii[i] = 0.5 * dist(a, b);
  }

  parallel_for(n0, [&](int lo, int hi) {
    std::vector<int> candidates;
    for (int ii = lo; ii < hi; ++ii) {
      const Vec2& x = mesh.node(mesh.interior_nodes()[ii]);
      candidates.clear();
      for (size_t e = 0; e < bedges.size(); ++e)
        if (dist(x, centers[e]) <= t_cap + radii[e]) candidates.push_back(static_cast<int>(e));
      if (candidates.empty()) continue;  // exits stay at t_cap
      for (int d = 0; d < nd; ++d)
        geo.exit_dist[static_cast<size_t>(ii) * nd + d] =
            line_exit_distance(mesh, x, geo.dirs.dirs[d], candidates, t_cap);
    }
  });
  return geo;
}

namespace {

double truncate_k(double t_exit, double mh, double floor_k) {
  double k = std::min(mh, t_exit);
  if (k < floor_k) k = std::min(floor_k, t_exit);
  return k;
}

}  // namespace

StencilTable::StencilTable(const StencilGeometry& geo, const StencilConfig& cfg)
    : geo_(&geo), cfg_(cfg) {
  const Mesh& mesh = *geo.mesh;
  const int n0 = mesh.num_interior();
  const int nd = geo.dirs.size();
  const double mh = cfg.m * mesh.h_avg();
  if (mh > geo.t_cap + 1e-12)
    throw std::invalid_argument("StencilTable: m*h_avg exceeds the geometry ray cap");
  const double floor_k = cfg.resolved_min_k(mesh);

  k_.resize(static_cast<size_t>(n0) * nd);
  probe_tri_.resize(2 * k_.size());
  probe_b_.resize(4 * k_.size());

  parallel_for(n0, [&](int lo, int hi) {
    for (int ii = lo; ii < hi; ++ii) {
      const Vec2& x = mesh.node(mesh.interior_nodes()[ii]);
      for (int d = 0; d < nd; ++d) {
        const size_t e = static_cast<size_t>(ii) * nd + d;
        const double k = truncate_k(geo.exit(ii, d), mh, floor_k);
        k_[e] = k;
        const Vec2 dir = geo.dirs.dirs[d];
        const FePoint plus = mesh.locate_point(x + dir * k);
        const FePoint minus = mesh.locate_point(x - dir * k);
        probe_tri_[2 * e] = plus.tri;
        probe_tri_[2 * e + 1] = minus.tri;
        probe_b_[4 * e] = plus.bary[0];
        probe_b_[4 * e + 1] = plus.bary[1];
        probe_b_[4 * e + 2] = minus.bary[0];
        probe_b_[4 * e + 3] = minus.bary[1];
      }
    }
  });
}

double stencil_size(const Mesh& mesh, int node, const Vec2& sigma, const StencilConfig& cfg) {
  if (mesh.is_boundary(node)) throw std::invalid_argument("stencil_size: boundary node");
  const double nrm = sigma.norm();
  const Vec2 d = sigma / nrm;
  const double mh = cfg.m * mesh.h_avg();
  const double t = line_exit_distance(mesh, mesh.node(node), d, all_boundary_edges(mesh),
                                      std::numeric_limits<double>::max());
  return truncate_k(t, mh, cfg.resolved_min_k(mesh));
}

StencilRow build_stencil_row(const Mesh& mesh, int node, const Control& c,
                             const StencilConfig& cfg) {
  StencilRow row;
  const Vec2 s1 = c.sigma1(), s2 = c.sigma2();
  row.k1 = stencil_size(mesh, node, s1, cfg);
  row.k2 = stencil_size(mesh, node, s2, cfg);
  row.lambda1 = c.lambda1();
  row.lambda2 = c.lambda2();
  const Vec2& x = mesh.node(node);
  row.plus1 = mesh.locate_point(x + s1 * row.k1);
  row.minus1 = mesh.locate_point(x - s1 * row.k1);
  row.plus2 = mesh.locate_point(x + s2 * row.k2);
  row.minus2 = mesh.locate_point(x - s2 * row.k2);
  return row;
}

// ---------------------------------------------------------------------------
// assembly

namespace {

struct RowEntries {
  // diag + 4 probes x 3 vertices
  std::array<int, 13> col;
  std::array<double, 13> val;
  int n = 0;

  void add(int c, double v) {
    col[n] = c;
    val[n] = v;
    ++n;
  }
};

// Negated second differences of the control at one interior node:
// row(v) = -sum_j lambda_j [v(x-k s_j) - 2 v(x_i) + v(x+k s_j)] / k_j^2.
void build_row(const StencilTable& table, const Mesh& mesh, int ii, const Control& c, int d1,
               int d2, RowEntries* row) {
  row->n = 0;
  const int node = mesh.interior_nodes()[ii];
  const double k1 = table.k(ii, d1), k2 = table.k(ii, d2);
  const double w1 = c.lambda1() / (k1 * k1), w2 = c.lambda2() / (k2 * k2);
  row->add(node, 2.0 * (w1 + w2));
  auto add_probe = [&](const FePoint& p, double w) {
    if (w == 0.0) return;
    const auto& t = mesh.tri(p.tri);
    // reconstructed barycentric weights can carry -1e-16 noise; anything
    // non-positive is treated as absent to keep the off-diagonal signs exact
    for (int v = 0; v < 3; ++v)
      if (p.bary[v] > 0.0) row->add(t[v], -w * p.bary[v]);
  };
  add_probe(table.probe_point_plus(ii, d1), w1);
  add_probe(table.probe_point_minus(ii, d1), w1);
  add_probe(table.probe_point_plus(ii, d2), w2);
  add_probe(table.probe_point_minus(ii, d2), w2);
}

}  // namespace

PolicySystem assemble_policy_system(const StencilTable& table, const Policy& policy,
                                    const ControlGrid& grid, const std::vector<double>& f_interior,
                                    const std::vector<double>& g_nodes) {
  const Mesh& mesh = table.mesh();
  const DirectionSet& ds = table.dirs();
  const int J = mesh.num_nodes();
  const int n0 = mesh.num_interior();

  std::vector<RowEntries> rows(n0);
  parallel_for(n0, [&](int lo, int hi) {
    for (int ii = lo; ii < hi; ++ii) {
      const int ci = policy.control[ii];
      build_row(table, mesh, ii, grid[ci], ds.of_control[ci].first, ds.of_control[ci].second,
                &rows[ii]);
    }
  });

  PolicySystem sys;
  sys.b = Eigen::VectorXd::Zero(J);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n0) * 13 + (J - n0));
  for (int ii = 0; ii < n0; ++ii) {
    const int node = mesh.interior_nodes()[ii];
    for (int e = 0; e < rows[ii].n; ++e) trips.emplace_back(node, rows[ii].col[e], rows[ii].val[e]);
    sys.b[node] = f_interior[ii] * grid[policy.control[ii]].sqrt_det();
  }
  for (int i = 0; i < J; ++i) {
    if (mesh.is_boundary(i)) {
      trips.emplace_back(i, i, 1.0);
      sys.b[i] = -g_nodes[i];
    }
  }
  sys.A.resize(J, J);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

PolicySystem assemble_policy_system(const Mesh& mesh, const Policy& policy,
                                    const ControlGrid& grid, const ScalarField& f,
                                    const ScalarField& g, const StencilConfig& cfg) {
  if (static_cast<int>(policy.control.size()) != mesh.num_interior())
    throw std::invalid_argument("assemble_policy_system: policy size mismatch");
  DirectionSet ds = build_direction_set(grid);
  StencilGeometry geo = build_stencil_geometry(mesh, std::move(ds), cfg.m * mesh.h_avg());
  StencilTable table(geo, cfg);
  std::vector<double> f_interior(mesh.num_interior());
  for (int ii = 0; ii < mesh.num_interior(); ++ii)
    f_interior[ii] = f(mesh.node(mesh.interior_nodes()[ii]));
  std::vector<double> g_nodes(mesh.num_nodes(), 0.0);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.is_boundary(i)) g_nodes[i] = g(mesh.node(i));
  return assemble_policy_system(table, policy, grid, f_interior, g_nodes);
}

// ---------------------------------------------------------------------------
// discrete Hamiltonian

std::pair<double, int> discrete_hamiltonian_interior(const StencilTable& table,
                                                     const ControlGrid& grid, const FeFunction& u,
                                                     int interior_idx, double s, double f_value) {
  const DirectionSet& ds = table.dirs();
  const int nd = ds.size();
  // stack-friendly scratch for the per-direction second differences
  thread_local std::vector<double> sd;
  sd.resize(nd);
  for (int d = 0; d < nd; ++d) sd[d] = table.second_difference(u, s, interior_idx, d);

  double best = -std::numeric_limits<double>::max();
  int best_idx = -1;
  for (int ci = 0; ci < grid.size(); ++ci) {
    const auto [d1, d2] = ds.of_control[ci];
    const double a = ds.split[ci];
    const double val = -(a * sd[d1] + (1.0 - a) * sd[d2]) + f_value * ds.sqrt_det[ci];
    if (val > best) {
      best = val;
      best_idx = ci;
    }
  }
  return {best, best_idx};
}

std::pair<double, int> discrete_hamiltonian_at_node(const Mesh& mesh, const FeFunction& u,
                                                    int node, double s, const ControlGrid& grid,
                                                    const ScalarField& f, const ScalarField& g,
                                                    const StencilConfig& cfg) {
  if (mesh.is_boundary(node)) return {s - g(mesh.node(node)), grid.isotropic_index};
  DirectionSet ds = build_direction_set(grid);
  StencilGeometry geo = build_stencil_geometry(mesh, std::move(ds), cfg.m * mesh.h_avg());
  StencilTable table(geo, cfg);
  return discrete_hamiltonian_interior(table, grid, u, mesh.interior_index(node), s,
                                       f(mesh.node(node)));
}

std::vector<double> scheme_residual(const Mesh& mesh, const FeFunction& u, const ControlGrid& grid,
                                    const ScalarField& f, const ScalarField& g,
                                    const StencilConfig& cfg) {
  DirectionSet ds = build_direction_set(grid);
  StencilGeometry geo = build_stencil_geometry(mesh, std::move(ds), cfg.m * mesh.h_avg());
  StencilTable table(geo, cfg);

  std::vector<double> res(mesh.num_nodes(), 0.0);
  const int n0 = mesh.num_interior();
  std::vector<double> f_interior(n0);
  for (int ii = 0; ii < n0; ++ii) f_interior[ii] = f(mesh.node(mesh.interior_nodes()[ii]));
  parallel_for(n0, [&](int lo, int hi) {
    for (int ii = lo; ii < hi; ++ii) {
      const int node = mesh.interior_nodes()[ii];
      res[node] =
          discrete_hamiltonian_interior(table, grid, u, ii, u.values[node], f_interior[ii]).first;
    }
  });
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.is_boundary(i)) res[i] = u.values[i] - g(mesh.node(i));
  return res;
}

std::pair<double, int> hamiltonian_on_function(const ScalarField& phi, const Vec2& x, double k,
                                               const ControlGrid& grid, double f) {
  if (k <= 0.0) throw std::invalid_argument("hamiltonian_on_function: k must be positive");
  DirectionSet ds = build_direction_set(grid);
  const double s = phi(x);
  std::vector<double> sd(ds.size());
  for (int d = 0; d < ds.size(); ++d) {
    const Vec2 dir = ds.dirs[d];
    sd[d] = (phi(x - dir * k) - 2.0 * s + phi(x + dir * k)) / (k * k);
  }
  double best = -std::numeric_limits<double>::max();
  int best_idx = -1;
  for (int ci = 0; ci < grid.size(); ++ci) {
    const auto [d1, d2] = ds.of_control[ci];
    const double a = ds.split[ci];
    const double val = -(a * sd[d1] + (1.0 - a) * sd[d2]) + f * ds.sqrt_det[ci];
    if (val > best) {
      best = val;
      best_idx = ci;
    }
  }
  return {best, best_idx};
}

}  // namespace mab

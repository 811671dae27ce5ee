#include "mab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = signed_area2(a, b, c);
  return {signed_area2(p, b, c) / area2, signed_area2(a, p, c) / area2,
          signed_area2(a, b, p) / area2};
}

}  // namespace

// ---------------------------------------------------------------------------
// construction

Mesh Mesh::from_raw(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> tris,
                    std::vector<uint8_t> boundary_flag, const DomainGeometry& geom) {
  Mesh m;
  m.geom_ = geom;
  m.nodes_ = std::move(nodes);
  m.tris_ = std::move(tris);
  m.boundary_flag_ = std::move(boundary_flag);
  m.finalize();
  return m;
}

void Mesh::finalize() {
  const int J = num_nodes();
  const int T = num_triangles();
  if (boundary_flag_.empty()) boundary_flag_.assign(J, 0);

  tri_diam_.resize(T);
  tri_area_.resize(T);
  double diam_sum = 0.0;
  h_max_ = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto& v = tris_[t];
    const Vec2 &a = nodes_[v[0]], &b = nodes_[v[1]], &c = nodes_[v[2]];
    const double area2 = signed_area2(a, b, c);
    if (area2 <= 0.0) throw std::runtime_error("mesh: non-positive triangle orientation");
    tri_area_[t] = 0.5 * area2;
    const double d = std::max({dist(a, b), dist(b, c), dist(c, a)});
    tri_diam_[t] = d;
    diam_sum += d;
    h_max_ = std::max(h_max_, d);
  }
  h_avg_ = T > 0 ? diam_sum / T : 0.0;

  // node -> triangle adjacency (CSR)
  node_tris_offset_.assign(J + 1, 0);
  for (const auto& v : tris_)
    for (int i : v) ++node_tris_offset_[i + 1];
  for (int i = 0; i < J; ++i) node_tris_offset_[i + 1] += node_tris_offset_[i];
  node_tris_.resize(3 * T);
  {
    std::vector<int> cursor(node_tris_offset_.begin(), node_tris_offset_.end() - 1);
    for (int t = 0; t < T; ++t)
      for (int i : tris_[t]) node_tris_[cursor[i]++] = t;
  }

  // Boundary edges are the edges with exactly one incident triangle; their
  // endpoints are the boundary nodes.
  std::map<std::pair<int, int>, std::pair<int, int>> edge_count;  // edge -> (count, tri)
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = tris_[t][e], b = tris_[t][(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto& entry = edge_count[{a, b}];
      ++entry.first;
      entry.second = t;
      if (entry.first > 2) throw std::runtime_error("mesh: edge shared by more than two triangles");
    }
  }
  boundary_edges_.clear();
  std::vector<uint8_t> incident_boundary(J, 0);
  for (const auto& [e, ct] : edge_count) {
    if (ct.first == 1) {
      boundary_edges_.push_back({e.first, e.second, ct.second});
      incident_boundary[e.first] = incident_boundary[e.second] = 1;
    }
  }
  boundary_flag_ = incident_boundary;

  interior_nodes_.clear();
  interior_index_.assign(J, -1);
  for (int i = 0; i < J; ++i) {
    if (!boundary_flag_[i]) {
      interior_index_[i] = static_cast<int>(interior_nodes_.size());
      interior_nodes_.push_back(i);
    }
  }

  // bucket grid for point location
  grid_lo_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  grid_hi_ = {-grid_lo_.x, -grid_lo_.y};
  for (const Vec2& p : nodes_) {
    grid_lo_.x = std::min(grid_lo_.x, p.x);
    grid_lo_.y = std::min(grid_lo_.y, p.y);
    grid_hi_.x = std::max(grid_hi_.x, p.x);
    grid_hi_.y = std::max(grid_hi_.y, p.y);
  }
  const double extent = std::max(grid_hi_.x - grid_lo_.x, grid_hi_.y - grid_lo_.y);
  grid_res_ = std::clamp(static_cast<int>(extent / std::max(h_max_, 1e-12)), 1, 4096);
  const double cell = extent / grid_res_;
  auto cell_range = [&](double lo, double hi, int& c0, int& c1, bool y) {
    const double base = y ? grid_lo_.y : grid_lo_.x;
    c0 = std::clamp(static_cast<int>((lo - base) / cell), 0, grid_res_ - 1);
    c1 = std::clamp(static_cast<int>((hi - base) / cell), 0, grid_res_ - 1);
  };
  std::vector<std::pair<int, int>> entries;  // (cell, tri)
  entries.reserve(4 * T);
  for (int t = 0; t < T; ++t) {
    const auto& v = tris_[t];
    double xlo = nodes_[v[0]].x, xhi = xlo, ylo = nodes_[v[0]].y, yhi = ylo;
    for (int i = 1; i < 3; ++i) {
      xlo = std::min(xlo, nodes_[v[i]].x); xhi = std::max(xhi, nodes_[v[i]].x);
      ylo = std::min(ylo, nodes_[v[i]].y); yhi = std::max(yhi, nodes_[v[i]].y);
    }
    int cx0, cx1, cy0, cy1;
    cell_range(xlo, xhi, cx0, cx1, false);
    cell_range(ylo, yhi, cy0, cy1, true);
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx) entries.emplace_back(cy * grid_res_ + cx, t);
  }
  std::sort(entries.begin(), entries.end());
  cell_offset_.assign(grid_res_ * grid_res_ + 1, 0);
  for (const auto& e : entries) ++cell_offset_[e.first + 1];
  for (size_t i = 1; i < cell_offset_.size(); ++i) cell_offset_[i] += cell_offset_[i - 1];
  cell_tris_.resize(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) cell_tris_[i] = entries[i].second;
}

// ---------------------------------------------------------------------------
// point location and evaluation

bool Mesh::try_locate(const Vec2& x, double tol, FePoint* out) const {
  const double extent = std::max(grid_hi_.x - grid_lo_.x, grid_hi_.y - grid_lo_.y);
  const double cell = extent / grid_res_;
  const int cx = std::clamp(static_cast<int>((x.x - grid_lo_.x) / cell), 0, grid_res_ - 1);
  const int cy = std::clamp(static_cast<int>((x.y - grid_lo_.y) / cell), 0, grid_res_ - 1);

  int best_tri = -1;
  std::array<double, 3> best_b{};
  double best_min = -std::numeric_limits<double>::max();
  // Search the cell and, if needed, one ring of neighbors. The candidate with
  // the largest minimum barycentric coordinate wins, which keeps points on
  // shared edges deterministic.
  for (int ring = 0; ring <= 1; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (ring == 1 && std::max(std::abs(dx), std::abs(dy)) != 1) continue;
        const int gx = cx + dx, gy = cy + dy;
        if (gx < 0 || gy < 0 || gx >= grid_res_ || gy >= grid_res_) continue;
        const int c = gy * grid_res_ + gx;
        for (int e = cell_offset_[c]; e < cell_offset_[c + 1]; ++e) {
          const int t = cell_tris_[e];
          const auto& v = tris_[t];
          const auto b = barycentric(x, nodes_[v[0]], nodes_[v[1]], nodes_[v[2]]);
          const double mn = std::min({b[0], b[1], b[2]});
          if (mn > best_min) {
            best_min = mn;
            best_tri = t;
            best_b = b;
          }
        }
      }
    }
    if (best_min >= -tol) break;
  }
  if (best_tri < 0 || best_min < -tol) return false;

  for (double& b : best_b) b = std::clamp(b, 0.0, 1.0);
  const double s = best_b[0] + best_b[1] + best_b[2];
  for (double& b : best_b) b /= s;
  out->tri = best_tri;
  out->bary = best_b;
  return true;
}

bool Mesh::inside_mesh(const Vec2& x, double tol) const {
  FePoint p;
  return try_locate(x, tol, &p);
}

Vec2 Mesh::clamp_to_domain(const Vec2& x) const {
  if (inside_mesh(x)) return x;
  double best = std::numeric_limits<double>::max();
  Vec2 best_foot = x;
  for (const auto& e : boundary_edges_) {
    Vec2 foot;
    const double d2 = point_segment_dist2(x, nodes_[e.a], nodes_[e.b], &foot);
    if (d2 < best) {
      best = d2;
      best_foot = foot;
    }
  }
  return best_foot;
}

FePoint Mesh::locate_point(const Vec2& x) const {
  FePoint p;
  if (try_locate(x, 1e-12, &p)) return p;
  // Outside the triangulated polygon (or in a roundoff crack): clamp onto the
  // nearest boundary edge and locate with a widened tolerance.
  const Vec2 y = clamp_to_domain(x);
  if (try_locate(y, 1e-9, &p)) return p;
  if (try_locate(y, 1e-6, &p)) return p;
  throw std::runtime_error("locate_point: point not inside the mesh");
}

Vec2 Mesh::point_of(const FePoint& p) const {
  const auto& v = tris_[p.tri];
  return nodes_[v[0]] * p.bary[0] + nodes_[v[1]] * p.bary[1] + nodes_[v[2]] * p.bary[2];
}

double eval_p1(const FeFunction& fun, const Vec2& x) {
  return fun.eval_fe(fun.mesh->locate_point(x));
}

Vec2 tri_gradient(const FeFunction& fun, int t) {
  const Mesh& m = *fun.mesh;
  const auto& v = m.tri(t);
  const Vec2 &a = m.node(v[0]), &b = m.node(v[1]), &c = m.node(v[2]);
  const double area2 = signed_area2(a, b, c);
  // gradients of the P1 hat functions
  const Vec2 ga{(b.y - c.y) / area2, (c.x - b.x) / area2};
  const Vec2 gb{(c.y - a.y) / area2, (a.x - c.x) / area2};
  const Vec2 gc{(a.y - b.y) / area2, (b.x - a.x) / area2};
  return ga * fun.values[v[0]] + gb * fun.values[v[1]] + gc * fun.values[v[2]];
}

// ---------------------------------------------------------------------------
// generation

Mesh build_domain_mesh(const DomainGeometry& geom, double target_h) {
  if (!(target_h > 0.0)) throw std::invalid_argument("build_domain_mesh: target_h must be positive");
  const int n = std::max(1, static_cast<int>(std::lround(std::sqrt(2.0) / target_h)));

  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;

  // Square [0,1]^2, structured (n+1)^2 grid.
  auto sq = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      tris.push_back({sq(i, j), sq(i + 1, j), sq(i + 1, j + 1)});
      tris.push_back({sq(i, j), sq(i + 1, j + 1), sq(i, j + 1)});
    }
  }

  // Three circular quadrants as concentric rings over angles [pi/2, 2pi].
  // Ring i sits at radius i/n and carries i+1 arcs per quadrant; its first and
  // last nodes coincide with the square nodes (0, i/n) and (i/n, 0).
  std::vector<std::vector<int>> ring_ids(n + 1);
  ring_ids[0] = {sq(0, 0)};
  for (int i = 1; i <= n; ++i) {
    const int arcs = i + 1;  // per quadrant
    const double r = static_cast<double>(i) / n;
    std::vector<int>& ids = ring_ids[i];
    for (int j = 0; j <= 3 * arcs; ++j) {
      if (j == 0) {
        ids.push_back(sq(0, i));  // angle pi/2 -> (0, r)
        continue;
      }
      if (j == 3 * arcs) {
        ids.push_back(sq(i, 0));  // angle 2 pi -> (r, 0)
        continue;
      }
      const double theta = 0.5 * kPi + 1.5 * kPi * j / (3.0 * arcs);
      ids.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
  }
  // Zip consecutive rings quadrant by quadrant (arc counts differ by one, so
  // angles only coincide at quadrant boundaries).
  auto angle_frac = [](int j, int arcs) { return static_cast<double>(j) / arcs; };
  for (int i = 0; i < n; ++i) {
    const int inner_arcs = i == 0 ? 0 : (i + 1);
    const int outer_arcs = i + 2;
    const auto& inner = ring_ids[i];
    const auto& outer = ring_ids[i + 1];
    for (int q = 0; q < 3; ++q) {
      int p = q * inner_arcs;  // index into inner ring
      int r = q * outer_arcs;  // index into outer ring
      const int p_end = inner_arcs == 0 ? 0 : (q + 1) * inner_arcs;
      const int r_end = (q + 1) * outer_arcs;
      while (p < p_end || r < r_end) {
        const bool advance_outer =
            r < r_end &&
            (p >= p_end || angle_frac(r + 1 - q * outer_arcs, outer_arcs) <=
                               angle_frac(p + 1 - q * inner_arcs, inner_arcs == 0 ? 1 : inner_arcs));
        if (advance_outer) {
          tris.push_back({inner[std::min(p, static_cast<int>(inner.size()) - 1)], outer[r], outer[r + 1]});
          ++r;
        } else {
          tris.push_back({inner[p], outer[r], inner[p + 1]});
          ++p;
        }
      }
    }
  }

  Mesh mesh = Mesh::from_raw(std::move(nodes), std::move(tris), {}, geom);
  if (mesh.num_interior() < 4)
    throw std::invalid_argument("build_domain_mesh: degenerate discretization (fewer than 4 interior nodes)");

  // Laplacian smoothing of interior nodes; moves are rejected when an
  // incident triangle would degenerate.
  std::vector<Vec2> pos = mesh.nodes();
  std::vector<std::vector<int>> nbrs(mesh.num_nodes());
  for (const auto& t : mesh.triangles()) {
    for (int e = 0; e < 3; ++e) {
      nbrs[t[e]].push_back(t[(e + 1) % 3]);
      nbrs[t[e]].push_back(t[(e + 2) % 3]);
    }
  }
  for (auto& v : nbrs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (int i : mesh.interior_nodes()) {
      Vec2 avg{0.0, 0.0};
      for (int j : nbrs[i]) avg += pos[j];
      avg = avg / static_cast<double>(nbrs[i].size());
      const Vec2 old = pos[i];
      pos[i] = avg;
      for (const int* t = mesh.node_tris_begin(i); t != mesh.node_tris_end(i); ++t) {
        const auto& v = mesh.tri(*t);
        if (signed_area2(pos[v[0]], pos[v[1]], pos[v[2]]) <= 1e-14) {
          pos[i] = old;
          break;
        }
      }
    }
  }
  return Mesh::from_raw(std::move(pos), std::vector<std::array<int, 3>>(mesh.triangles()),
                        {}, geom);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> nodes = mesh.nodes();
  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * mesh.num_triangles());

  std::map<std::pair<int, int>, int> edge_tri_count;
  for (const auto& t : mesh.triangles())
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_tri_count[{a, b}];
    }

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = midpoint.find({a, b});
    if (it != midpoint.end()) return it->second;
    Vec2 p = (nodes[a] + nodes[b]) * 0.5;
    if (edge_tri_count[{a, b}] == 1) p = mesh.geometry().project_to_boundary(p);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(p);
    midpoint[{a, b}] = id;
    return id;
  };

  for (const auto& t : mesh.triangles()) {
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
    tris.push_back({t[0], m01, m20});
    tris.push_back({t[1], m12, m01});
    tris.push_back({t[2], m20, m12});
    tris.push_back({m01, m12, m20});
  }
  return Mesh::from_raw(std::move(nodes), std::move(tris), {}, mesh.geometry());
}

// ---------------------------------------------------------------------------
// text io

void Mesh::write(std::ostream& os) const {
  os.precision(17);
  os << num_nodes() << ' ' << num_triangles() << '\n';
  for (int i = 0; i < num_nodes(); ++i)
    os << nodes_[i].x << ' ' << nodes_[i].y << ' ' << (boundary_flag_[i] ? 1 : 0) << '\n';
  for (const auto& t : tris_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void Mesh::write_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open mesh output file: " + path);
  write(os);
}

Mesh Mesh::read(std::istream& is, const DomainGeometry& geom) {
  int J = 0, T = 0;
  if (!(is >> J >> T) || J <= 0 || T <= 0) throw std::runtime_error("mesh read: bad header");
  std::vector<Vec2> nodes(J);
  std::vector<uint8_t> flags(J);
  for (int i = 0; i < J; ++i) {
    int f = 0;
    if (!(is >> nodes[i].x >> nodes[i].y >> f)) throw std::runtime_error("mesh read: bad node line");
    flags[i] = static_cast<uint8_t>(f != 0);
  }
  std::vector<std::array<int, 3>> tris(T);
  for (int t = 0; t < T; ++t) {
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2]))
      throw std::runtime_error("mesh read: bad triangle line");
    for (int v : tris[t])
      if (v < 0 || v >= J) throw std::runtime_error("mesh read: node index out of range");
  }
  Mesh m = from_raw(std::move(nodes), std::move(tris), std::move(flags), geom);
  return m;
}

Mesh Mesh::read_file(const std::string& path, const DomainGeometry& geom) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open mesh input file: " + path);
  return read(is, geom);
}

}  // namespace mab

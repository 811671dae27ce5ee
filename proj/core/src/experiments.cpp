#include "mab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mab {

ProblemSpec quartic_problem() {
  ProblemSpec spec;
  spec.name = "quartic";
  spec.exact = [](const Vec2& x) {
    const double r2 = x.norm2();
    return r2 * r2;
  };
  spec.exact_grad = [](const Vec2& x) { return x * (4.0 * x.norm2()); };
  // det D^2 |x|^4 = 48 |x|^4, so f = 2 sqrt(det) = 8 sqrt(3) |x|^2
  spec.f = [](const Vec2& x) { return 8.0 * std::sqrt(3.0) * x.norm2(); };
  spec.g = spec.exact;
  return spec;
}

ProblemSpec nonsmooth_problem() {
  ProblemSpec spec;
  spec.name = "nonsmooth";
  spec.exact = [](const Vec2& x) { return std::abs(x.x); };
  spec.exact_grad = [](const Vec2& x) {
    return Vec2{x.x > 0.0 ? 1.0 : (x.x < 0.0 ? -1.0 : 0.0), 0.0};
  };
  spec.f = [](const Vec2&) { return 0.0; };
  spec.g = spec.exact;
  return spec;
}

ErrorNorms error_norms(const Mesh& mesh, const FeFunction& u_h, const ProblemSpec& spec) {
  if (!spec.has_exact()) throw std::invalid_argument("error_norms: exact solution missing");
  if (!spec.has_grad()) throw std::invalid_argument("error_norms: exact gradient missing");

  double l2_num = 0.0, l2_den = 0.0;
  double h1s_num = 0.0, h1s_den = 0.0;
  double linf_num = 0.0, linf_den = 0.0;

  auto linf_sample = [&](double uh, double u) {
    linf_num = std::max(linf_num, std::abs(uh - u));
    linf_den = std::max(linf_den, std::abs(u));
  };

  for (int i = 0; i < mesh.num_nodes(); ++i)
    linf_sample(u_h.values[i], spec.exact(mesh.node(i)));

  // 3-point edge-midpoint rule, exact for quadratics.
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.tri(t);
    const double w = mesh.tri_area(t) / 3.0;
    const Vec2 grad_h = tri_gradient(u_h, t);
    for (int e = 0; e < 3; ++e) {
      const int a = v[e], b = v[(e + 1) % 3];
      const Vec2 q = (mesh.node(a) + mesh.node(b)) * 0.5;
      const double uh = 0.5 * (u_h.values[a] + u_h.values[b]);
      const double u = spec.exact(q);
      l2_num += w * (uh - u) * (uh - u);
      l2_den += w * u * u;
      const Vec2 gd = grad_h - spec.exact_grad(q);
      const Vec2 ge = spec.exact_grad(q);
      h1s_num += w * gd.norm2();
      h1s_den += w * ge.norm2();
      linf_sample(uh, u);
    }
  }

  ErrorNorms err;
  err.l2_rel = std::sqrt(l2_num) / std::sqrt(l2_den);
  err.linf_rel = linf_num / linf_den;
  err.h1_rel = std::sqrt(l2_num + h1s_num) / std::sqrt(l2_den + h1s_den);
  return err;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("fit_order: need matching samples, at least two");
  double sx = 0.0, sy = 0.0;
  const int n = static_cast<int>(h.size());
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    lx[i] = std::log(h[i]);
    ly[i] = std::log(std::max(err[i], 1e-300));
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

const StudyCell* ErrorReport::cell(int level, double m) const {
  for (const auto& c : cells)
    if (c.level == level && c.m == m) return &c;
  return nullptr;
}

Mesh benchmark_mesh(const DomainGeometry& geom, int level) {
  Mesh mesh = build_domain_mesh(geom, kBenchmarkTargetH);
  for (int l = 0; l < level; ++l) mesh = refine_uniform(mesh);
  return mesh;
}

ErrorReport convergence_study(const ProblemSpec& spec, int level_lo, int level_hi,
                              const std::vector<double>& m_values, const ControlGrid& grid,
                              const StudyOptions& opts) {
  if (level_hi < level_lo || level_lo < 0)
    throw std::invalid_argument("convergence_study: bad level range");
  if (m_values.empty()) throw std::invalid_argument("convergence_study: empty m list");

  using Clock = std::chrono::steady_clock;
  ErrorReport report;
  const DomainGeometry geom;
  const double m_max = *std::max_element(m_values.begin(), m_values.end());

  Mesh mesh = benchmark_mesh(geom, level_lo);

  const DirectionSet ds = build_direction_set(grid);
  for (int level = level_lo; level <= level_hi; ++level) {
    if (level > level_lo) mesh = refine_uniform(mesh);
    report.h_avg.push_back(mesh.h_avg());
    report.dofs.push_back(mesh.num_nodes());
    const StencilGeometry geo = build_stencil_geometry(mesh, ds, m_max * mesh.h_avg());

    for (double m : m_values) {
      StudyCell cell;
      cell.level = level;
      cell.dofs = mesh.num_nodes();
      cell.m = m;
      const auto t0 = Clock::now();
      try {
        HowardOptions hopts;
        hopts.tol = opts.tol;
        hopts.max_iter = opts.max_iter;
        hopts.geometry = &geo;
        StencilConfig cfg;
        cfg.m = m;
        const SolveReport solve = howard_solve(mesh, grid, spec.f, spec.g, cfg, hopts);
        cell.iterations = solve.iterations;
        cell.converged = solve.converged;
        if (spec.has_exact()) cell.err = error_norms(mesh, solve.u, spec);
      } catch (const std::exception& e) {
        cell.converged = false;
        if (opts.progress)
          *opts.progress << "cell (level " << level << ", m " << m << ") failed: " << e.what()
                         << '\n';
      }
      cell.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      if (opts.progress)
        *opts.progress << "level " << level << " m " << m << ": dofs " << cell.dofs << ", "
                       << cell.iterations << " iterations, linf " << cell.err.linf_rel << '\n';
      report.cells.push_back(cell);
    }
  }

  // best m per level and norm, then least-squares orders of the best-m errors
  const int num_levels = level_hi - level_lo + 1;
  auto pick_best = [&](auto norm_of) {
    std::vector<int> best(num_levels, 0);
    for (int li = 0; li < num_levels; ++li) {
      double best_err = std::numeric_limits<double>::max();
      for (size_t mi = 0; mi < m_values.size(); ++mi) {
        const StudyCell& c = report.cells[li * m_values.size() + mi];
        const double e = norm_of(c);
        if (c.converged && e < best_err) {
          best_err = e;
          best[li] = static_cast<int>(mi);
        }
      }
    }
    return best;
  };
  report.best_m_l2 = pick_best([](const StudyCell& c) { return c.err.l2_rel; });
  report.best_m_linf = pick_best([](const StudyCell& c) { return c.err.linf_rel; });
  report.best_m_h1 = pick_best([](const StudyCell& c) { return c.err.h1_rel; });

  if (num_levels >= 2) {
    auto orders = [&](const std::vector<int>& best, auto norm_of) {
      std::vector<double> errs(num_levels);
      for (int li = 0; li < num_levels; ++li)
        errs[li] = norm_of(report.cells[li * m_values.size() + best[li]]);
      return fit_order(report.h_avg, errs);
    };
    report.order_l2 = orders(report.best_m_l2, [](const StudyCell& c) { return c.err.l2_rel; });
    report.order_linf =
        orders(report.best_m_linf, [](const StudyCell& c) { return c.err.linf_rel; });
    report.order_h1 = orders(report.best_m_h1, [](const StudyCell& c) { return c.err.h1_rel; });
  }
  return report;
}

void write_report_csv(std::ostream& os, const ErrorReport& report) {
  os << "level,dofs,m,iterations,l2_rel,linf_rel,h1_rel,seconds\n";
  std::ostringstream line;
  line.precision(12);
  for (const auto& c : report.cells) {
    line.str("");
    line << c.level << ',' << c.dofs << ',' << c.m << ',' << c.iterations << ',' << c.err.l2_rel
         << ',' << c.err.linf_rel << ',' << c.err.h1_rel << ',' << c.seconds << '\n';
    os << line.str();
  }
}

}  // namespace mab

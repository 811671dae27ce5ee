#include "mab/howard.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mab/parallel.hpp"

namespace mab {

namespace {

struct SampledData {
  std::vector<double> f_interior;  // per interior index
  std::vector<double> g_nodes;     // per node; zero at interior nodes
};

SampledData sample_data(const Mesh& mesh, const ScalarField& f, const ScalarField& g) {
  SampledData d;
  d.f_interior.resize(mesh.num_interior());
  for (int ii = 0; ii < mesh.num_interior(); ++ii)
    d.f_interior[ii] = f(mesh.node(mesh.interior_nodes()[ii]));
  d.g_nodes.assign(mesh.num_nodes(), 0.0);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.is_boundary(i)) d.g_nodes[i] = g(mesh.node(i));
  return d;
}

// Solves L^B v + F^B = 0 for the frozen policy: boundary values are imposed
// exactly and the eliminated interior block (an irreducibly diagonally
// dominant M-matrix) is solved to an inf-norm residual below
// 1e-12 (1 + |b|_inf).
FeFunction solve_policy_system(const StencilTable& table, const ControlGrid& grid,
                               const DirectionSet& ds, const Policy& policy,
                               const SampledData& data,
                               const Eigen::VectorXd* warm_start = nullptr) {
  const Mesh& mesh = table.mesh();
  const int n0 = mesh.num_interior();

  struct Entry {
    int col;
    double val;
  };
  std::vector<std::array<Entry, 13>> rows(n0);
  std::vector<int> row_n(n0, 0);
  std::vector<double> rhs(n0, 0.0);

  parallel_for(n0, [&](int lo, int hi) {
    for (int ii = lo; ii < hi; ++ii) {
      const int ci = policy.control[ii];
      const Control& c = grid[ci];
      const auto [d1, d2] = ds.of_control[ci];
      const int node = mesh.interior_nodes()[ii];
      const double k1 = table.k(ii, d1), k2 = table.k(ii, d2);
      const double w1 = c.lambda1() / (k1 * k1), w2 = c.lambda2() / (k2 * k2);
      double r = -data.f_interior[ii] * c.sqrt_det();
      auto& row = rows[ii];
      int n = 0;
      row[n++] = {node, 2.0 * (w1 + w2)};
      auto add_probe = [&](const FePoint& p, double w) {
        if (w == 0.0) return;
        const auto& t = mesh.tri(p.tri);
        for (int v = 0; v < 3; ++v) {
          if (p.bary[v] <= 0.0) continue;  // clip reconstruction noise
          const double coef = -w * p.bary[v];
          if (mesh.is_boundary(t[v]))
            r -= coef * data.g_nodes[t[v]];
          else
            row[n++] = {t[v], coef};
        }
      };
      add_probe(table.probe_point_plus(ii, d1), w1);
      add_probe(table.probe_point_minus(ii, d1), w1);
      add_probe(table.probe_point_plus(ii, d2), w2);
      add_probe(table.probe_point_minus(ii, d2), w2);
      row_n[ii] = n;
      rhs[ii] = r;
    }
  });

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n0) * 13);
  for (int ii = 0; ii < n0; ++ii)
    for (int e = 0; e < row_n[ii]; ++e)
      trips.emplace_back(ii, mesh.interior_index(rows[ii][e].col), rows[ii][e].val);

  Eigen::SparseMatrix<double> A(n0, n0);
  A.setFromTriplets(trips.begin(), trips.end());
  // M-matrix sign pattern; a violation would indicate an assembly bug.
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
      const bool ok = it.row() == it.col() ? it.value() > 0.0 : it.value() <= 1e-14;
      if (!ok) throw std::runtime_error("policy system: M-matrix sign pattern violated");
    }

  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n0);
  const double target = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd x;

  // Jacobi-preconditioned BiCGSTAB with the previous Howard iterate as
  // initial guess, polished by iterative refinement until the inf-norm
  // residual meets the target. Wide stencils make direct factorizations fill
  // up badly, so the direct solve is only the last-resort fallback.
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> krylov;
  krylov.setTolerance(1e-10);
  krylov.setMaxIterations(5000);
  krylov.compute(A);
  if (warm_start && warm_start->size() == n0)
    x = krylov.solveWithGuess(b, *warm_start);
  else
    x = krylov.solve(b);

  bool ok = false;
  for (int refine = 0; refine < 3 && x.allFinite(); ++refine) {
    const Eigen::VectorXd r = b - A * x;
    if (r.lpNorm<Eigen::Infinity>() <= target) {
      ok = true;
      break;
    }
    x += krylov.solve(r);
  }
  if (!ok) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("policy_solve: sparse factorization failed");
    x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw std::runtime_error("policy_solve: solve failed");
  }

  FeFunction v(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) v.values[i] = data.g_nodes[i];
  for (int ii = 0; ii < n0; ++ii) v.values[mesh.interior_nodes()[ii]] = x[ii];
  return v;
}

// One policy-improvement sweep; also reports the scheme residual at v
// (the improved value is the residual of the discrete Hamiltonian).
std::pair<Policy, double> improve_and_residual(const StencilTable& table, const ControlGrid& grid,
                                               const SampledData& data, const FeFunction& v) {
  const Mesh& mesh = table.mesh();
  const int n0 = mesh.num_interior();
  Policy p;
  p.control.resize(n0);
  const int chunk = kParallelChunk;
  std::vector<double> chunk_max((n0 + chunk - 1) / chunk, 0.0);
  parallel_for(n0, [&](int lo, int hi) {
    double local = 0.0;
    for (int ii = lo; ii < hi; ++ii) {
      const int node = mesh.interior_nodes()[ii];
      const auto [val, argmax] = discrete_hamiltonian_interior(table, grid, v, ii, v.values[node],
                                                               data.f_interior[ii]);
      p.control[ii] = argmax;
      local = std::max(local, std::abs(val));
    }
    chunk_max[lo / chunk] = local;
  });
  double res = 0.0;
  for (double c : chunk_max) res = std::max(res, c);
  return {std::move(p), res};
}

}  // namespace

Policy policy_improve(const Mesh& mesh, const FeFunction& v, const ControlGrid& grid,
                      const ScalarField& f, const ScalarField& g, const StencilConfig& cfg) {
  DirectionSet ds = build_direction_set(grid);
  StencilGeometry geo = build_stencil_geometry(mesh, std::move(ds), cfg.m * mesh.h_avg());
  StencilTable table(geo, cfg);
  return improve_and_residual(table, grid, sample_data(mesh, f, g), v).first;
}

FeFunction policy_solve(const Mesh& mesh, const Policy& policy, const ControlGrid& grid,
                        const ScalarField& f, const ScalarField& g, const StencilConfig& cfg) {
  if (static_cast<int>(policy.control.size()) != mesh.num_interior())
    throw std::invalid_argument("policy_solve: policy size mismatch");
  DirectionSet ds = build_direction_set(grid);
  StencilGeometry geo = build_stencil_geometry(mesh, ds, cfg.m * mesh.h_avg());
  StencilTable table(geo, cfg);
  return solve_policy_system(table, grid, geo.dirs, policy, sample_data(mesh, f, g));
}

SolveReport howard_solve(const Mesh& mesh, const ControlGrid& grid, const ScalarField& f,
                         const ScalarField& g, const StencilConfig& cfg,
                         const HowardOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  const StencilGeometry* geo = opts.geometry;
  StencilGeometry own_geo;
  StencilTable own_table;
  const StencilTable* table = opts.stencil;
  if (table) {
    if (table->m() != cfg.m) throw std::invalid_argument("howard_solve: stencil/m mismatch");
  } else {
    if (!geo) {
      own_geo = build_stencil_geometry(mesh, build_direction_set(grid), cfg.m * mesh.h_avg());
      geo = &own_geo;
    }
    own_table = StencilTable(*geo, cfg);
    table = &own_table;
  }
  const SampledData data = sample_data(mesh, f, g);

  SolveReport report;
  Policy policy;
  if (opts.initial_policy) {
    if (static_cast<int>(opts.initial_policy->control.size()) != mesh.num_interior())
      throw std::invalid_argument("howard_solve: initial policy size mismatch");
    policy = *opts.initial_policy;
  } else {
    policy.control.assign(mesh.num_interior(), grid.isotropic_index);
  }

  if (opts.trace) *opts.trace << "iter,step_inf,residual_inf,seconds\n";

  FeFunction v_prev;
  Eigen::VectorXd guess;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    FeFunction v = solve_policy_system(*table, grid, table->dirs(), policy, data,
                                       iter > 1 ? &guess : nullptr);
    report.iterations = iter;

    double step = 0.0;
    if (iter == 1) {
      for (double x : v.values) step = std::max(step, std::abs(x));
    } else {
      double increase = 0.0;
      for (size_t i = 0; i < v.values.size(); ++i) {
        step = std::max(step, std::abs(v.values[i] - v_prev.values[i]));
        increase = std::max(increase, v.values[i] - v_prev.values[i]);
      }
      report.monotonicity_violation = std::max(report.monotonicity_violation, increase);
    }

    auto [next_policy, residual] = improve_and_residual(*table, grid, data, v);
    report.step_inf.push_back(step);
    report.residual_inf.push_back(residual);
    report.seconds.push_back(elapsed());
    if (opts.trace)
      *opts.trace << iter << ',' << step << ',' << residual << ',' << report.seconds.back()
                  << '\n';

    v_prev = std::move(v);
    if (iter > 1 && step < opts.tol) {
      report.converged = true;
      break;
    }
    guess.resize(mesh.num_interior());
    for (int ii = 0; ii < mesh.num_interior(); ++ii)
      guess[ii] = v_prev.values[mesh.interior_nodes()[ii]];
    policy = std::move(next_policy);
  }

  report.u = std::move(v_prev);
  report.wall_seconds = elapsed();
  return report;
}

}  // namespace mab

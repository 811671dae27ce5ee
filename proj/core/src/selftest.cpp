#include "mab/selftest.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <ostream>
#include <random>

#include "mab/controls.hpp"
#include "mab/discretization.hpp"
#include "mab/experiments.hpp"

namespace mab::selftest {

namespace {

void check(Result& r, bool ok) {
  ++r.checks;
  if (!ok) {
    ++r.failures;
    r.passed = false;
  }
}

SymMat2 rotated(double mu1, double mu2, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {mu1 * c * c + mu2 * s * s, (mu1 - mu2) * c * s, mu1 * s * s + mu2 * c * c};
}

}  // namespace

Result oracle_equivalence(std::ostream& log, int samples) {
  Result r;
  std::mt19937 rng(20240517);
  std::uniform_real_distribution<double> entry(-5.0, 5.0);
  std::uniform_real_distribution<double> source(0.0, 10.0);

  const ControlGrid grid = build_control_grid(256, 129);
  const ControlGrid grid2 = build_control_grid(512, 257);

  double worst_rel = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SymMat2 A{entry(rng), entry(rng), entry(rng)};
    const double f = source(rng);
    const double exact = exact_hamiltonian(A, f);
    const double coarse = grid_hamiltonian(grid, A, f).first;
    const double fine = grid_hamiltonian(grid2, A, f).first;
    const double scale = 1.0 + A.frobenius_norm() + f;
    const double gap = exact - coarse;
    const double gap2 = exact - fine;
    check(r, gap >= -1e-10);                 // discrete sup never exceeds the sup
    check(r, gap <= 5e-3 * scale);           // within the control-resolution tolerance
    check(r, gap2 <= gap + 1e-12);           // nested grids: gap shrinks
    worst_rel = std::max(worst_rel, gap / scale);
  }
  log << "oracle equivalence: " << r.checks << " checks, worst gap/scale " << worst_rel
      << (r.passed ? " [pass]" : " [FAIL]") << '\n';
  return r;
}

Result equivalence_lemma(std::ostream& log, int samples) {
  Result r;
  std::mt19937 rng(987654321);
  std::uniform_real_distribution<double> eig(0.0, 6.0);
  std::uniform_real_distribution<double> angle(0.0, 3.14159265358979323846);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < samples; ++i) {
    const double theta = angle(rng);
    const int family = i % 3;
    SymMat2 A;
    double f = 0.0;
    if (family == 0) {
      // PSD with det A = (f/2)^2: both operators vanish
      const double mu1 = eig(rng), mu2 = eig(rng);
      A = rotated(mu1, mu2, theta);
      f = 2.0 * std::sqrt(mu1 * mu2);
    } else if (family == 1) {
      // PSD with determinant mismatch: both operators non-zero
      const double mu1 = eig(rng) + 0.2, mu2 = eig(rng) + 0.2;
      A = rotated(mu1, mu2, theta);
      const double f_match = 2.0 * std::sqrt(mu1 * mu2);
      f = unit(rng) < 0.5 ? 0.5 * f_match : 1.7 * f_match + 0.3;
    } else {
      // indefinite or negative definite with matching determinant: the
      // Monge-Ampere residual vanishes but A is not PSD, so H stays positive
      const double mu1 = -(eig(rng) + 0.2);
      const double mu2 = unit(rng) < 0.5 ? -(eig(rng) + 0.2) : eig(rng) + 0.2;
      A = rotated(mu1, mu2, theta);
      const double det = mu1 * mu2;
      f = det > 0.0 ? 2.0 * std::sqrt(det) : 0.0;
    }
    const double H = exact_hamiltonian(A, f);
    const double M = monge_ampere_residual(A, f);
    const bool psd = A.eigenvalues()[0] >= -1e-12;
    const bool h_zero = std::abs(H) <= 1e-9;
    const bool ma_zero = std::abs(M) <= 1e-9 && psd;
    check(r, h_zero == ma_zero);
  }
  log << "equivalence lemma: " << r.checks << " checks" << (r.passed ? " [pass]" : " [FAIL]")
      << '\n';
  return r;
}

Result mmatrix_suite(std::ostream& log, int policies) {
  Result r;
  const DomainGeometry geom;
  const Mesh mesh = benchmark_mesh(geom, 1);
  const ControlGrid grid = build_control_grid(16, 5);
  StencilConfig cfg;
  cfg.m = 4.0;

  std::mt19937 rng(13571113);
  std::uniform_int_distribution<int> pick(0, grid.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto zero = [](const Vec2&) { return 0.0; };
  for (int p = 0; p < policies; ++p) {
    Policy policy;
    policy.control.resize(mesh.num_interior());
    for (int& c : policy.control) c = pick(rng);
    const PolicySystem sys = assemble_policy_system(mesh, policy, grid, zero, zero, cfg);

    // sign pattern: positive diagonal, non-positive off-diagonal, unit
    // boundary rows
    bool pattern_ok = true;
    for (int c = 0; c < sys.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, c); it; ++it) {
        if (it.row() == it.col()) {
          if (!(it.value() > 0.0)) pattern_ok = false;
        } else if (it.value() > 1e-14) {
          pattern_ok = false;
        }
      }
    check(r, pattern_ok);

    // solve A v = c with non-positive interior data: the maximum must sit on
    // the boundary (discrete maximum principle)
    Eigen::VectorXd rhs(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i)
      rhs[i] = mesh.is_boundary(i) ? 2.0 * unit(rng) - 1.0 : -unit(rng);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.A);
    check(r, lu.info() == Eigen::Success);
    if (lu.info() != Eigen::Success) continue;
    const Eigen::VectorXd v = lu.solve(rhs);
    double interior_max = -1e300, boundary_max = -1e300;
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      if (mesh.is_boundary(i))
        boundary_max = std::max(boundary_max, v[i]);
      else
        interior_max = std::max(interior_max, v[i]);
    }
    check(r, interior_max <= boundary_max + 1e-9);
  }
  log << "M-matrix suite: " << r.checks << " checks on " << policies << " random policies"
      << (r.passed ? " [pass]" : " [FAIL]") << '\n';
  return r;
}

bool run_all(std::ostream& log) {
  const Result a = oracle_equivalence(log);
  const Result b = equivalence_lemma(log);
  const Result c = mmatrix_suite(log);
  const bool ok = a.passed && b.passed && c.passed;
  log << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  return ok;
}

}  // namespace mab::selftest

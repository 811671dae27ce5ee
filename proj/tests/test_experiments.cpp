#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mab/experiments.hpp"

using namespace mab;

namespace {

// Hessian of |x|^4: 4|x|^2 Id + 8 x x^T.
SymMat2 quartic_hessian(const Vec2& x) {
  const double r2 = x.norm2();
  return {4.0 * r2 + 8.0 * x.x * x.x, 8.0 * x.x * x.y, 4.0 * r2 + 8.0 * x.y * x.y};
}

SymMat2 fd_hessian(const ScalarField& u, const Vec2& x, double h) {
  auto at = [&](double dx, double dy) { return u({x.x + dx, x.y + dy}); };
  const double uxx = (at(h, 0) - 2.0 * at(0, 0) + at(-h, 0)) / (h * h);
  const double uyy = (at(0, h) - 2.0 * at(0, 0) + at(0, -h)) / (h * h);
  const double uxy =
      (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
  return {uxx, uxy, uyy};
}

}  // namespace

TEST_CASE("quartic problem data") {
  const ProblemSpec q = quartic_problem();
  CHECK(q.exact({0, 0}) == 0.0);
  CHECK(q.f({0, 0}) == 0.0);
  CHECK(q.f({1, 0}) == doctest::Approx(8.0 * std::sqrt(3.0)).epsilon(1e-14));

  SUBCASE("source matches the finite-difference Hessian determinant") {
    const SymMat2 H = fd_hessian(q.exact, {1.0, 0.0}, 1e-4);
    const double f_ref = 2.0 * std::sqrt(H.det());
    CHECK(q.f({1, 0}) == doctest::Approx(f_ref).epsilon(1e-6));
  }

  SUBCASE("Monge-Ampere residual vanishes along the exact solution") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    for (int i = 0; i < 100; ++i) {
      const Vec2 x{u(rng), u(rng)};
      CHECK(std::abs(monge_ampere_residual(quartic_hessian(x), q.f(x))) <= 1e-9);
    }
  }

  SUBCASE("gradient is consistent") {
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int i = 0; i < 50; ++i) {
      const Vec2 x{u(rng), u(rng)};
      const double h = 1e-6;
      const Vec2 g = q.exact_grad(x);
      CHECK(g.x == doctest::Approx((q.exact({x.x + h, x.y}) - q.exact({x.x - h, x.y})) / (2 * h))
                       .epsilon(1e-5));
      CHECK(g.y == doctest::Approx((q.exact({x.x, x.y + h}) - q.exact({x.x, x.y - h})) / (2 * h))
                       .epsilon(1e-5));
    }
  }
}

TEST_CASE("nonsmooth problem data") {
  const ProblemSpec ns = nonsmooth_problem();
  CHECK(ns.exact({0.3, -0.8}) == doctest::Approx(0.3));
  CHECK(ns.g({-1.0, 0.0}) == doctest::Approx(1.0));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) CHECK(ns.f({u(rng), u(rng)}) == 0.0);
}

TEST_CASE("error norms") {
  DomainGeometry geom;
  const Mesh mesh = benchmark_mesh(geom, 1);

  SUBCASE("interpolated affine data has negligible error") {
    ProblemSpec affine;
    affine.name = "affine";
    affine.exact = [](const Vec2& x) { return 3.0 * x.x - 2.0 * x.y + 1.0; };
    affine.exact_grad = [](const Vec2&) { return Vec2{3.0, -2.0}; };
    affine.f = [](const Vec2&) { return 0.0; };
    affine.g = affine.exact;
    const ErrorNorms err = error_norms(mesh, interpolate(mesh, affine.exact), affine);
    CHECK(err.l2_rel <= 1e-10);
    CHECK(err.linf_rel <= 1e-10);
    CHECK(err.h1_rel <= 1e-10);
  }

  SUBCASE("zero against one is a unit relative error") {
    ProblemSpec one;
    one.name = "one";
    one.exact = [](const Vec2&) { return 1.0; };
    one.exact_grad = [](const Vec2&) { return Vec2{0.0, 0.0}; };
    one.f = one.exact;
    one.g = one.exact;
    const ErrorNorms err = error_norms(mesh, FeFunction(mesh), one);
    CHECK(err.l2_rel == doctest::Approx(1.0));
    CHECK(err.linf_rel == doctest::Approx(1.0));
  }

  SUBCASE("interpolation error of the quartic decays at second order") {
    const ProblemSpec q = quartic_problem();
    const Mesh fine = refine_uniform(mesh);
    const double e_coarse = error_norms(mesh, interpolate(mesh, q.exact), q).l2_rel;
    const double e_fine = error_norms(fine, interpolate(fine, q.exact), q).l2_rel;
    CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.30));
  }

  SUBCASE("missing exact data is rejected") {
    ProblemSpec custom;
    custom.name = "custom";
    custom.f = [](const Vec2&) { return 0.0; };
    custom.g = custom.f;
    CHECK_THROWS_AS(error_norms(mesh, FeFunction(mesh), custom), std::invalid_argument);
  }
}

TEST_CASE("order fitting") {
  // err = C h^2 exactly
  const std::vector<double> h = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> err;
  for (double x : h) err.push_back(3.0 * x * x);
  CHECK(fit_order(h, err) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single-cell study matches a direct solve") {
  const ControlGrid grid = build_control_grid(16, 5);
  const ProblemSpec q = quartic_problem();
  StudyOptions opts;
  const ErrorReport report = convergence_study(q, 1, 1, {4.0}, grid, opts);
  REQUIRE(report.cells.size() == 1);

  DomainGeometry geom;
  const Mesh mesh = benchmark_mesh(geom, 1);
  StencilConfig cfg;
  cfg.m = 4.0;
  const SolveReport solve = howard_solve(mesh, grid, q.f, q.g, cfg);
  const ErrorNorms err = error_norms(mesh, solve.u, q);

  const StudyCell& cell = report.cells[0];
  CHECK(cell.dofs == mesh.num_nodes());
  CHECK(cell.iterations == solve.iterations);
  CHECK(cell.err.l2_rel == err.l2_rel);
  CHECK(cell.err.linf_rel == err.linf_rel);
  CHECK(cell.err.h1_rel == err.h1_rel);
}

TEST_CASE("study report layout and CSV") {
  const ControlGrid grid = build_control_grid(16, 5);
  const ProblemSpec q = quartic_problem();
  StudyOptions opts;
  const ErrorReport report = convergence_study(q, 0, 2, {2.0, 4.0}, grid, opts);
  REQUIRE(report.cells.size() == 6);

  SUBCASE("dofs strictly increase across levels") {
    for (size_t i = 1; i < report.dofs.size(); ++i) CHECK(report.dofs[i] > report.dofs[i - 1]);
    for (const auto& c : report.cells) {
      CHECK(c.err.l2_rel >= 0.0);
      CHECK(c.err.linf_rel >= 0.0);
      CHECK(c.err.h1_rel >= 0.0);
    }
  }

  SUBCASE("CSV rows are parseable and finite") {
    std::ostringstream os;
    write_report_csv(os, report);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "level,dofs,m,iterations,l2_rel,linf_rel,h1_rel,seconds");
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) {
      ++rows;
      std::istringstream row(line);
      std::string field;
      int fields = 0;
      while (std::getline(row, field, ',')) {
        ++fields;
        CHECK(std::isfinite(std::stod(field)));
      }
      CHECK(fields == 8);
    }
    CHECK(rows == 6);
  }

  SUBCASE("reruns are identical apart from timings") {
    const ErrorReport again = convergence_study(q, 0, 2, {2.0, 4.0}, grid, opts);
    REQUIRE(again.cells.size() == report.cells.size());
    for (size_t i = 0; i < report.cells.size(); ++i) {
      CHECK(again.cells[i].iterations == report.cells[i].iterations);
      CHECK(again.cells[i].err.l2_rel == report.cells[i].err.l2_rel);
      CHECK(again.cells[i].err.linf_rel == report.cells[i].err.linf_rel);
      CHECK(again.cells[i].err.h1_rel == report.cells[i].err.h1_rel);
    }
  }
}

TEST_CASE("coarse-level errors sit in the reference magnitude bands") {
  DomainGeometry geom;
  const Mesh mesh = benchmark_mesh(geom, 0);
  const ControlGrid grid = build_control_grid(64, 33);

  SUBCASE("quartic, m = 2") {
    const ProblemSpec q = quartic_problem();
    StencilConfig cfg;
    cfg.m = 2.0;
    const SolveReport rep = howard_solve(mesh, grid, q.f, q.g, cfg);
    REQUIRE(rep.converged);
    const double linf = error_norms(mesh, rep.u, q).linf_rel;
    CHECK(linf >= 3e-2);
    CHECK(linf <= 3e-1);
  }

  SUBCASE("nonsmooth, m = 4") {
    const ProblemSpec ns = nonsmooth_problem();
    StencilConfig cfg;
    cfg.m = 4.0;
    const SolveReport rep = howard_solve(mesh, grid, ns.f, ns.g, cfg);
    REQUIRE(rep.converged);
    const double linf = error_norms(mesh, rep.u, ns).linf_rel;
    CHECK(linf >= 3e-2);
    CHECK(linf <= 3.2e-1);
  }
}

TEST_CASE("oversized stencil factors hurt the coarse level") {
  const ControlGrid grid = build_control_grid(32, 9);
  const ProblemSpec q = quartic_problem();
  StudyOptions opts;
  const ErrorReport report = convergence_study(q, 0, 0, {2.0, 4.0, 8.0, 64.0}, grid, opts);
  const double best = report.cells[report.best_m_linf[0]].err.linf_rel;
  CHECK(report.cells[3].m == 64.0);
  CHECK(report.cells[3].err.linf_rel > best);
}

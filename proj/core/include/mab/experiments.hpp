#ifndef MAB_EXPERIMENTS_HPP
#define MAB_EXPERIMENTS_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mab/howard.hpp"

namespace mab {

/// A benchmark problem: source term f, Dirichlet data g and, when available,
/// the exact solution and gradient for error evaluation.
struct ProblemSpec {
  std::string name;
  ScalarField f;
  ScalarField g;
  ScalarField exact;                          // empty for custom problems
  std::function<Vec2(const Vec2&)> exact_grad;

  bool has_exact() const { return static_cast<bool>(exact); }
  bool has_grad() const { return static_cast<bool>(exact_grad); }
};

/// Smooth benchmark: u = |x|^4 with source f = 8 sqrt(3) |x|^2.
ProblemSpec quartic_problem();

/// Degenerate benchmark: viscosity solution u = |x_1| with f = 0.
ProblemSpec nonsmooth_problem();

/// Coarse mesh target spacing used by all benchmark runs (91 nodes at level 0).
inline constexpr double kBenchmarkTargetH = 0.28;

/// The standard benchmark mesh hierarchy: `level` uniform refinements of the
/// coarse mesh.
Mesh benchmark_mesh(const DomainGeometry& geom, int level);

struct ErrorNorms {
  double l2_rel = 0.0;
  double linf_rel = 0.0;
  double h1_rel = 0.0;
};

/// Relative errors against the exact solution: L2 and the H1 seminorm are
/// integrated with the 3-point edge-midpoint rule per triangle (exact for
/// quadratics), the sup norm is taken over nodes and quadrature points, and
/// the H1 error is the full norm. Throws std::invalid_argument when the
/// required exact data is missing.
ErrorNorms error_norms(const Mesh& mesh, const FeFunction& u_h, const ProblemSpec& spec);

struct StudyCell {
  int level = 0;
  int dofs = 0;
  double m = 0.0;
  int iterations = 0;
  bool converged = false;
  ErrorNorms err;
  double seconds = 0.0;
};

struct ErrorReport {
  std::vector<StudyCell> cells;   // level-major, m ascending
  std::vector<double> h_avg;      // per level
  std::vector<int> dofs;          // per level

  // Per level: the m minimizing each norm (indices into the m list).
  std::vector<int> best_m_l2, best_m_linf, best_m_h1;
  // Least-squares orders of the best-m errors against h_avg.
  double order_l2 = 0.0, order_linf = 0.0, order_h1 = 0.0;

  const StudyCell* cell(int level, double m) const;
};

struct StudyOptions {
  double tol = 1e-6;
  int max_iter = 100;
  std::ostream* progress = nullptr;
};

/// Runs the refinement/stencil-factor sweep: for each level (refinements of
/// the coarse mesh) and each m, a Howard solve plus error evaluation. Failed
/// cells are recorded as not converged without aborting the sweep.
ErrorReport convergence_study(const ProblemSpec& spec, int level_lo, int level_hi,
                              const std::vector<double>& m_values, const ControlGrid& grid,
                              const StudyOptions& opts = StudyOptions());

/// CSV with header "level,dofs,m,iterations,l2_rel,linf_rel,h1_rel,seconds".
void write_report_csv(std::ostream& os, const ErrorReport& report);

/// Least-squares slope of log(err) against log(h); expects matching sizes.
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace mab

#endif

#ifndef MAB_HOWARD_HPP
#define MAB_HOWARD_HPP

#include <iosfwd>
#include <limits>

#include "mab/discretization.hpp"

namespace mab {

/// Outcome of a Howard (policy iteration) solve. One iteration is one linear
/// solve; step_inf[l] is the sup-norm change of the l-th iterate against its
/// predecessor (the first entry is the norm of the first iterate itself) and
/// residual_inf[l] the sup-norm of the scheme residual at the l-th iterate.
struct SolveReport {
  FeFunction u;
  int iterations = 0;
  bool converged = false;
  std::vector<double> step_inf;
  std::vector<double> residual_inf;
  std::vector<double> seconds;  // cumulative wall time after each iteration
  double wall_seconds = 0.0;
  // Runtime check of the monotone-decrease property: largest componentwise
  // increase between consecutive iterates from the second iterate onwards.
  double monotonicity_violation = 0.0;
};

struct HowardOptions {
  double tol = 1e-6;
  int max_iter = 100;
  std::ostream* trace = nullptr;             // CSV lines "iter,step_inf,residual_inf,seconds"
  const StencilGeometry* geometry = nullptr; // optional prebuilt ray-exit table
  const StencilTable* stencil = nullptr;     // optional prebuilt probe table (must match cfg.m)
  const Policy* initial_policy = nullptr;    // default: isotropic control everywhere
};

/// Pointwise policy improvement: the argmax control of the discrete
/// Hamiltonian at every interior node with s = v(x_i).
Policy policy_improve(const Mesh& mesh, const FeFunction& v, const ControlGrid& grid,
                      const ScalarField& f, const ScalarField& g, const StencilConfig& cfg);

/// Solves the affine policy system; boundary nodes carry exactly g(x_i) and
/// the interior block is eliminated with a sparse direct factorization.
/// Throws std::runtime_error on factorization failure.
FeFunction policy_solve(const Mesh& mesh, const Policy& policy, const ControlGrid& grid,
                        const ScalarField& f, const ScalarField& g, const StencilConfig& cfg);

/// Howard's method from the isotropic initial policy: alternately solve the
/// affine system of the frozen policy and improve the policy pointwise, until
/// the iterate step drops below tol in the sup norm. The iterate sequence is
/// non-increasing from the first solve onwards; since the control grid is
/// finite, the loop terminates exactly once the policy repeats.
SolveReport howard_solve(const Mesh& mesh, const ControlGrid& grid, const ScalarField& f,
                         const ScalarField& g, const StencilConfig& cfg,
                         const HowardOptions& opts = HowardOptions());

}  // namespace mab

#endif

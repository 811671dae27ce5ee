#ifndef MAB_CONTROLS_HPP
#define MAB_CONTROLS_HPP

#include <utility>
#include <vector>

#include "mab/geometry.hpp"

namespace mab {

/// One matrix of the control set: B = R(theta) diag(a, 1-a) R(theta)^T, a
/// symmetric positive semi-definite matrix of unit trace. theta in [0, pi),
/// a in [0, 1/2]; the eigenvector for eigenvalue a is (cos theta, sin theta).
struct Control {
  double theta = 0.0;
  double a = 0.5;

  double lambda1() const { return a; }
  double lambda2() const { return 1.0 - a; }
  double det() const { return a * (1.0 - a); }
  double sqrt_det() const { return std::sqrt(a * (1.0 - a)); }
  Vec2 sigma1() const { return {std::cos(theta), std::sin(theta)}; }
  Vec2 sigma2() const { return {-std::sin(theta), std::cos(theta)}; }

  bool is_isotropic() const { return a == 0.5; }
};

SymMat2 control_to_matrix(const Control& c);

/// Finite discretization of the control set: angles i*pi/n_angles and
/// eigenvalue splits j/(2(n_a-1)), deduplicated as matrices (every theta
/// collapses to the same matrix at a = 1/2). Controls are ordered angle-major,
/// split ascending; the isotropic control appears exactly once.
struct ControlGrid {
  std::vector<Control> controls;
  int n_angles = 0;
  int n_a = 0;
  int isotropic_index = -1;

  int size() const { return static_cast<int>(controls.size()); }
  const Control& operator[](int i) const { return controls[i]; }
};

/// Requires n_angles >= 1 and n_a >= 2.
ControlGrid build_control_grid(int n_angles, int n_a);

/// Bellman operator H(A, f) = sup over unit-trace PSD B of
/// (-B:A + f sqrt(det B)), evaluated in closed form: the maximizer commutes
/// with A, so the sup reduces to a concave 1-d problem over the eigenvalue
/// split whose stationary point is known explicitly. Absolute accuracy is at
/// roundoff level. Throws std::invalid_argument for f < 0.
double exact_hamiltonian(const SymMat2& A, double f);

/// Monge-Ampere residual (f/2)^2 - det(A).
double monge_ampere_residual(const SymMat2& A, double f);

/// Discrete sup of -B:A + f sqrt(det B) over the control grid, with the
/// argmax index (ties broken by lowest index). Lower bound of
/// exact_hamiltonian with a gap that shrinks under grid refinement.
std::pair<double, int> grid_hamiltonian(const ControlGrid& grid, const SymMat2& A, double f);

}  // namespace mab

#endif

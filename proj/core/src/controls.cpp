#include "mab/controls.hpp"

#include <cmath>
#include <stdexcept>

namespace mab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SymMat2 control_to_matrix(const Control& c) {
  // R(theta) diag(a, 1-a) R(theta)^T
  const double ct = std::cos(c.theta), st = std::sin(c.theta);
  const double a = c.a, b = 1.0 - c.a;
  return {a * ct * ct + b * st * st, (a - b) * ct * st, a * st * st + b * ct * ct};
}

ControlGrid build_control_grid(int n_angles, int n_a) {
  if (n_angles < 1) throw std::invalid_argument("build_control_grid: n_angles must be >= 1");
  if (n_a < 2) throw std::invalid_argument("build_control_grid: n_a must be >= 2");
  ControlGrid grid;
  grid.n_angles = n_angles;
  grid.n_a = n_a;
  for (int i = 0; i < n_angles; ++i) {
    const double theta = kPi * i / n_angles;
    for (int j = 0; j < n_a; ++j) {
      const double a = 0.5 * j / (n_a - 1);
      // all rotations coincide at the isotropic matrix; keep it once
      if (j == n_a - 1 && i > 0) continue;
      grid.controls.push_back({theta, a});
      if (j == n_a - 1) grid.isotropic_index = static_cast<int>(grid.controls.size()) - 1;
    }
  }
  return grid;
}

double exact_hamiltonian(const SymMat2& A, double f) {
  if (f < 0.0) throw std::invalid_argument("exact_hamiltonian: f must be non-negative");
  // A maximizer commutes with A, which reduces the sup to the concave 1-d
  // problem g(a) = -(a mu1 + (1-a) mu2) + f sqrt(a(1-a)) over a in [0,1]
  // with mu1 <= mu2 the eigenvalues of A. The stationarity condition
  // (mu2 - mu1) + f (1-2a) / (2 sqrt(a(1-a))) = 0 squares to a quadratic in a
  // with roots (1 +- delta/sqrt(delta^2 + f^2)) / 2; both are compared with
  // the endpoints a = 0, 1.
  const auto mu = A.eigenvalues();
  const double delta = mu[1] - mu[0];
  auto g = [&](double a) {
    return -(a * mu[0] + (1.0 - a) * mu[1]) + f * std::sqrt(std::max(a * (1.0 - a), 0.0));
  };
  double best = std::max(g(0.0), g(1.0));
  if (f > 0.0) {
    const double s = std::sqrt(delta * delta + f * f);
    best = std::max(best, g(0.5 * (1.0 + delta / s)));
    best = std::max(best, g(0.5 * (1.0 - delta / s)));
  }
  return best;
}

double monge_ampere_residual(const SymMat2& A, double f) {
  const double q = 0.5 * f;
  return q * q - A.det();
}

std::pair<double, int> grid_hamiltonian(const ControlGrid& grid, const SymMat2& A, double f) {
  double best = -std::numeric_limits<double>::max();
  int best_idx = -1;
  for (int i = 0; i < grid.size(); ++i) {
    const Control& c = grid[i];
    const double val = -control_to_matrix(c).ddot(A) + f * c.sqrt_det();
    if (val > best) {
      best = val;
      best_idx = i;
    }
  }
  return {best, best_idx};
}

}  // namespace mab

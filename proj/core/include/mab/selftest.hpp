#ifndef MAB_SELFTEST_HPP
#define MAB_SELFTEST_HPP

#include <iosfwd>

namespace mab::selftest {

struct Result {
  bool passed = true;
  int checks = 0;
  int failures = 0;
};

/// Discrete control-grid sup against the closed-form Bellman operator on
/// random matrices: gap within tolerance, non-negative and non-increasing
/// under grid doubling.
Result oracle_equivalence(std::ostream& log, int samples = 1000);

/// Zero-set biconditional between the Bellman and Monge-Ampere operators on
/// constructed matrix/source pairs.
Result equivalence_lemma(std::ostream& log, int samples = 1000);

/// M-matrix sign pattern, solvability and the discrete maximum principle for
/// random policies on the once-refined mesh.
Result mmatrix_suite(std::ostream& log, int policies = 100);

/// All suites; returns true when everything passed.
bool run_all(std::ostream& log);

}  // namespace mab::selftest

#endif

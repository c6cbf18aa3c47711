#pragma once

#include <functional>

#include "aclasso/solver.hpp"

// Independent reference implementations used by the test suite: a sign-pattern
// enumeration oracle for the constrained prox, a two-block ADMM baseline
// solver, and central-difference Jacobians.  None of these share code paths
// with the implementations they check, except that the ADMM z-block reuses
// prox_affine_l1 by design.

namespace aclasso {
namespace reference {

// Exhaustive KKT oracle for Prox_{lambda q}: enumerates all 3^n sign
// patterns, solves each consistent pattern's linear system for (z, w), and
// returns the feasible candidate with least objective.  Requires n <= 12,
// lambda > 0 and all mu_i != 0.
Vector prox_bruteforce(const Vector& x, const ConstraintSpec& spec);

struct AdmmResult {
  Vector x;
  Vector z;
  int iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

// Two-block ADMM on the splitting x = z, with the smooth loss on the x-block
// and lambda*q on the z-block (enforced exactly by prox_affine_l1).  Fixed
// penalty 1.0.  Stops when both residual norms fall below
// tol * (1 + ||z||) or at max_iters.
AdmmResult admm_baseline(const Problem& problem, double lambda, int max_iters,
                         double tol);

// Column j = (map(x + h e_j) - map(x - h e_j)) / (2h).
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& map,
                   const Vector& x, double h);

}  // namespace reference
}  // namespace aclasso

#pragma once

#include <optional>

#include "aclasso/losses.hpp"
#include "aclasso/prox.hpp"

// Double-loop solver for
//
//     min_x  loss(A x) + lambda * ( ||x||_1 + indicator{ mu'x = c } ).
//
// The outer loop is a preconditioned proximal-point iteration whose
// subproblems are maximized through their duals; the inner loop is a
// semismooth Newton method on the dual gradient, with the Newton matrix
// assembled from the structured B-subdifferential element of the prox
// (diagonal block plus a sparse-column low-rank term).

namespace aclasso {

struct Problem {
  Matrix A;
  Loss loss;
  Vector mu;
  double c = 0.0;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  bool valid() const;
};

// Outer schedule: proximal weights sigma_k = 3^floor(k/2) (capped), gap
// tolerances epsilon_k = 0.5 / 1.06^k, preconditioner weight tau.
struct OuterSchedule {
  double tau = 1.0;
  double sigma_cap = 1e8;

  double sigma(int k) const;
  double epsilon(int k) const;
};

struct SolveOptions {
  double tol = 1e-8;    // relative KKT residual of the original problem
  int max_outer = 100;
  int max_inner = 100;
  double sigma_cap = 1e8;
  std::optional<Vector> x0;  // warm starts
  std::optional<Vector> y0;
};

// One dual subproblem: anchored at x_k with weights (sigma_k, tau).
struct SubproblemContext {
  const Problem* problem = nullptr;
  double lambda = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  Vector x_anchor;
  Vector Ax_anchor;

  SubproblemContext(const Problem& p, double lam, double sig, double t,
                    Vector xk);
};

// 1 / lambda_max(A A'), estimated by power iteration (relative tolerance
// 1e-6, at most 500 iterations).  Throws on a zero matrix.
double estimate_tau(const Matrix& A);

// Dual objective G_k(y) of the proximal subproblem, evaluated in a regrouped
// form that avoids the sigma^2-scale cancellations of the raw Moreau-envelope
// display.
double dual_value(const SubproblemContext& ctx, const Vector& y);

// grad G_k(y) = -Prox_{sigma f/tau}(A x_k + (sigma/tau) y)
//               + A Prox_{sigma lambda q}(x_k - sigma A'y).
Vector dual_gradient(const SubproblemContext& ctx, const Vector& y);

// Self-adjoint positive-definite Newton matrix in structural form:
//   Diag((sigma/tau) h + eps) + sigma [ A_K A_K' - (1/s)(A_K mu_K)(A_K mu_K)' ]
// where K is the active set of the current prox point and h the loss-prox
// Jacobian diagonal.
struct NewtonOperator {
  Vector diag;        // m entries, all positive
  Matrix A_active;    // m x |K| columns of A indexed by the mask
  Vector A_active_mu; // A_K mu_K
  double s = 0.0;     // sum of mu_j^2 over K (0 disables the rank-one term)
  double sigma = 1.0;
  Index direct_threshold = 2000;  // dense factorization up to this many rows

  Index rows() const { return diag.size(); }
  Index active_count() const { return A_active.cols(); }
  Vector apply(const Vector& d) const;
  Matrix dense() const;
};

NewtonOperator assemble_newton_operator(const SubproblemContext& ctx,
                                        const Vector& y, double eps_j);

// Solve op * d = rhs.  Dense Cholesky when rows <= direct_threshold, the
// Sherman-Morrison-Woodbury route through the |K| x |K| core when the active
// set is smaller than m, conjugate gradients otherwise.  The returned
// direction satisfies ||op d - rhs|| <= tol.  Throws std::runtime_error when
// the factorization detects loss of positive definiteness.
Vector solve_newton_direction(const NewtonOperator& op, const Vector& rhs,
                              double tol);

struct InnerResult {
  Vector y;
  Vector x_new;    // Prox_{sigma lambda q}(x_k - sigma A'y), feasible exactly
  double grad_norm = 0.0;
  int newton_iters = 0;
  int linesearch_backtracks = 0;
  bool converged = false;
  std::vector<double> grad_history;   // ||grad G_k|| per iterate, front = y0
  std::vector<double> value_history;  // G_k per iterate, ascending under Armijo
};

// Semismooth Newton ascent on G_k from y0 until ||grad G_k(y)|| <= tol or the
// iteration cap.  Uses the shift eps_j = 0.1 min(0.1, ||grad||) (zero for
// least squares), the residual rule min(0.005, ||grad||^{1.5}) for the
// direction solve, and Armijo halving with slope fraction 1e-4.
InnerResult ssn_maximize(const SubproblemContext& ctx, Vector y0, double tol,
                         int max_iters);

struct OuterRecord {
  double gap = 0.0;        // F_k(x_{k+1}) - G_k(y_{k+1})
  double gap_bound = 0.0;  // (eps_k^2 / 2 sigma_k) min(1, ||dx||^2 + tau||A dx||^2)
  double primal_value = 0.0;  // F_k(x_{k+1}), the scale of the gap evaluation
  double kkt_residual = 0.0;
  double feasibility = 0.0;  // |mu'x - c|
  int newton_iters = 0;
};

struct SolveResult {
  Vector x;
  Vector y;
  double objective = 0.0;      // loss(Ax) + lambda ||x||_1
  double kkt_residual = 0.0;
  double feasibility = 0.0;
  int outer_iters = 0;
  int total_newton_iters = 0;
  bool converged = false;
  double seconds = 0.0;
  std::vector<OuterRecord> history;
};

// Preconditioned proximal-point outer loop; stops at the relative KKT
// residual tolerance or the outer cap (returning the best iterate flagged
// non-converged).
SolveResult solve_ppa(const Problem& problem, double lambda,
                      const SolveOptions& options = {});

// Natural-map residual ||x - Prox_{lambda q}(x - A' grad loss(Ax))|| / (1 + ||x||).
double kkt_residual(const Problem& problem, double lambda, const Vector& x);

// loss(Ax) + lambda ||x||_1 (the affine constraint is reported separately as
// a feasibility value).
double objective_value(const Problem& problem, double lambda, const Vector& x);

}  // namespace aclasso

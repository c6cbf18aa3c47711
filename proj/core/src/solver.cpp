#include "aclasso/solver.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace aclasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

bool Problem::valid() const {
  return A.size() > 0 && loss.valid() && loss.anchor.size() == A.rows() &&
         mu.size() == A.cols();
}

double OuterSchedule::sigma(int k) const {
  return std::min(std::pow(3.0, k / 2), sigma_cap);
}

double OuterSchedule::epsilon(int k) const {
  return 0.5 / std::pow(1.06, k);
}

SubproblemContext::SubproblemContext(const Problem& p, double lam, double sig,
                                     double t, Vector xk)
    : problem(&p), lambda(lam), sigma(sig), tau(t), x_anchor(std::move(xk)) {
  Ax_anchor = p.A * x_anchor;
}

double estimate_tau(const Matrix& A) {
  if (A.size() == 0 || A.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("estimate_tau: zero matrix");

  // Power iteration on the smaller Gram matrix; both share lambda_max(AA').
  const bool use_cols = A.cols() <= A.rows();
  const Index dim = use_cols ? A.cols() : A.rows();
  auto apply = [&](const Vector& v) -> Vector {
    if (use_cols) return A.transpose() * (A * v);
    return A * (A.transpose() * v);
  };

  std::minstd_rand rng(42u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = unif(rng);
  v.normalize();

  double lambda_max = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = apply(v);
    const double rayleigh = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) {
      // Start vector fell in the null space; restart deterministically.
      for (Index i = 0; i < dim; ++i) v[i] = unif(rng);
      v.normalize();
      continue;
    }
    v = w / nw;
    if (it > 0 && std::abs(rayleigh - lambda_max) <= 1e-6 * rayleigh) {
      lambda_max = rayleigh;
      break;
    }
    lambda_max = rayleigh;
  }
  return 1.0 / lambda_max;
}

namespace {

struct Eval {
  Vector u;        // A x_k + (sigma/tau) y
  Vector v;        // x_k - sigma A'y
  Vector p;        // loss prox of u
  ProxResult zres;  // regularizer prox of v
  double value = 0.0;
  Vector grad;
};

// Value and gradient of G_k in one pass.  The Moreau-envelope display is
// regrouped so no term carries a sigma^2 magnitude; otherwise the duality
// gap drowns in cancellation once sigma_k grows large.
Eval evaluate(const SubproblemContext& ctx, const Vector& y) {
  const Problem& pb = *ctx.problem;
  const double sigma = ctx.sigma;
  const double tau = ctx.tau;

  Eval e;
  e.u = ctx.Ax_anchor + (sigma / tau) * y;
  e.v = ctx.x_anchor - sigma * (pb.A.transpose() * y);
  e.p = loss_prox(pb.loss, e.u, sigma / tau);
  e.zres = prox_affine_l1(e.v, ConstraintSpec{pb.mu, pb.c, sigma * ctx.lambda});

  const Vector& z = e.zres.z;
  const Vector Az = pb.A * z;

  const double loss_part =
      loss_value(pb.loss, e.p) +
      (tau / sigma) * (0.5 * e.p.squaredNorm() - e.p.dot(ctx.Ax_anchor)) -
      e.p.dot(y);
  const double reg_part =
      ctx.lambda * z.lpNorm<1>() +
      (1.0 / sigma) * (0.5 * z.squaredNorm() - z.dot(ctx.x_anchor)) +
      Az.dot(y);
  e.value = loss_part + reg_part +
            (0.5 / sigma) * ctx.x_anchor.squaredNorm() +
            (0.5 * tau / sigma) * ctx.Ax_anchor.squaredNorm();
  e.grad = Az - e.p;
  return e;
}

// F_k at a feasible point (prox outputs satisfy the affine constraint, so
// the indicator contributes nothing).
double primal_value(const SubproblemContext& ctx, const Vector& x,
                    const Vector& Ax) {
  const Problem& pb = *ctx.problem;
  const Vector dx = x - ctx.x_anchor;
  const Vector Adx = Ax - ctx.Ax_anchor;
  return loss_value(pb.loss, Ax) + ctx.lambda * x.lpNorm<1>() +
         (0.5 / ctx.sigma) * dx.squaredNorm() +
         (0.5 * ctx.tau / ctx.sigma) * Adx.squaredNorm();
}

Vector cg_solve(const NewtonOperator& op, const Vector& rhs, double tol) {
  Vector x = Vector::Zero(rhs.size());
  Vector r = rhs;
  Vector p = r;
  double rs = r.squaredNorm();
  const int cap = static_cast<int>(10 * rhs.size()) + 200;
  for (int it = 0; it < cap && std::sqrt(rs) > tol; ++it) {
    const Vector Ap = op.apply(p);
    const double alpha = rs / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return x;
}

}  // namespace

double dual_value(const SubproblemContext& ctx, const Vector& y) {
  return evaluate(ctx, y).value;
}

Vector dual_gradient(const SubproblemContext& ctx, const Vector& y) {
  return evaluate(ctx, y).grad;
}

Vector NewtonOperator::apply(const Vector& d) const {
  Vector out = diag.cwiseProduct(d);
  if (A_active.cols() > 0)
    out += sigma * (A_active * (A_active.transpose() * d));
  if (s > 0.0) out -= (sigma / s) * A_active_mu.dot(d) * A_active_mu;
  return out;
}

Matrix NewtonOperator::dense() const {
  Matrix M = Matrix::Zero(rows(), rows());
  M.diagonal() = diag;
  if (A_active.cols() > 0)
    M.noalias() += sigma * (A_active * A_active.transpose());
  if (s > 0.0) M.noalias() -= (sigma / s) * (A_active_mu * A_active_mu.transpose());
  return M;
}

namespace {

NewtonOperator assemble_from_eval(const SubproblemContext& ctx, const Eval& e,
                                  double eps_j) {
  const Problem& pb = *ctx.problem;
  const ProxJacobianRep jac =
      loss_prox_jacobian(pb.loss, e.u, ctx.sigma / ctx.tau);
  const ConstraintSpec spec{pb.mu, pb.c, ctx.sigma * ctx.lambda};
  const BsubElement elem = bsub_element(e.zres, spec);

  NewtonOperator op;
  op.sigma = ctx.sigma;
  op.s = elem.s;
  op.diag = Vector(pb.rows());
  const double ratio = ctx.sigma / ctx.tau;
  for (Index i = 0; i < pb.rows(); ++i)
    op.diag[i] = ratio * jac.entry(i) + eps_j;

  std::vector<Index> active;
  for (Index j = 0; j < elem.mask.size(); ++j)
    if (elem.mask[j] != 0.0) active.push_back(j);
  op.A_active = Matrix(pb.rows(), static_cast<Index>(active.size()));
  for (Index k = 0; k < op.A_active.cols(); ++k)
    op.A_active.col(k) = pb.A.col(active[static_cast<std::size_t>(k)]);
  if (elem.s > 0.0) {
    Vector mu_active(op.A_active.cols());
    for (Index k = 0; k < op.A_active.cols(); ++k)
      mu_active[k] = elem.mu_masked[active[static_cast<std::size_t>(k)]];
    op.A_active_mu = op.A_active * mu_active;
  } else {
    op.A_active_mu = Vector::Zero(pb.rows());
  }
  return op;
}

}  // namespace

NewtonOperator assemble_newton_operator(const SubproblemContext& ctx,
                                        const Vector& y, double eps_j) {
  return assemble_from_eval(ctx, evaluate(ctx, y), eps_j);
}

Vector solve_newton_direction(const NewtonOperator& op, const Vector& rhs,
                              double tol) {
  if (rhs.size() != op.rows())
    throw std::invalid_argument("solve_newton_direction: dimension mismatch");
  tol = std::max(tol, 1e-14 * (1.0 + rhs.norm()));
  const Index m = op.rows();
  const Index k = op.active_count();

  if (m <= op.direct_threshold) {
    Eigen::LLT<Matrix> llt(op.dense());
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("solve_newton_direction: factorization failed");
    Vector d = llt.solve(rhs);
    const Vector r = rhs - op.apply(d);
    if (r.norm() > tol) d += llt.solve(r);
    return d;
  }

  if (k < m) {
    // Woodbury through the k x k core, then a Sherman-Morrison downdate for
    // the constraint rank-one term.
    const Vector dinv = op.diag.cwiseInverse();
    Eigen::LLT<Matrix> core_llt;
    if (k > 0) {
      Matrix core = Matrix::Identity(k, k);
      core.noalias() +=
          op.sigma * (op.A_active.transpose() *
                      dinv.asDiagonal() * op.A_active);
      core_llt.compute(core);
      if (core_llt.info() != Eigen::Success)
        throw std::runtime_error("solve_newton_direction: core factorization failed");
    }
    auto base_solve = [&](const Vector& r) -> Vector {
      Vector out = dinv.cwiseProduct(r);
      if (k > 0) {
        const Vector t = core_llt.solve(op.A_active.transpose() * out);
        out -= op.sigma * dinv.cwiseProduct(op.A_active * t);
      }
      return out;
    };
    Vector d = base_solve(rhs);
    if (op.s > 0.0) {
      const double rho = op.sigma / op.s;
      const Vector g = base_solve(op.A_active_mu);
      const double denom = 1.0 - rho * op.A_active_mu.dot(g);
      if (denom <= 0.0)
        throw std::runtime_error("solve_newton_direction: downdate lost definiteness");
      d += (rho * op.A_active_mu.dot(d) / denom) * g;
    }
    const Vector r = rhs - op.apply(d);
    if (r.norm() > tol) {
      Vector corr = base_solve(r);
      if (op.s > 0.0) {
        const double rho = op.sigma / op.s;
        const Vector g = base_solve(op.A_active_mu);
        const double denom = 1.0 - rho * op.A_active_mu.dot(g);
        corr += (rho * op.A_active_mu.dot(corr) / denom) * g;
      }
      d += corr;
    }
    return d;
  }

  return cg_solve(op, rhs, tol);
}

InnerResult ssn_maximize(const SubproblemContext& ctx, Vector y0, double tol,
                         int max_iters) {
  const bool shift_free =
      ctx.problem->loss.kind == LossKind::least_squares;

  InnerResult res;
  Vector y = std::move(y0);
  Eval cur = evaluate(ctx, y);
  double grad_norm = cur.grad.norm();
  res.grad_history.push_back(grad_norm);
  res.value_history.push_back(cur.value);

  while (grad_norm > tol && res.newton_iters < max_iters) {
    double eps_j = shift_free ? 0.0 : 0.1 * std::min(0.1, grad_norm);
    Vector d;
    for (int attempt = 0;; ++attempt) {
      try {
        const NewtonOperator op = assemble_from_eval(ctx, cur, eps_j);
        d = solve_newton_direction(op, cur.grad,
                                   std::min(0.005, std::pow(grad_norm, 1.5)));
        break;
      } catch (const std::runtime_error&) {
        if (attempt >= 5) throw;
        eps_j = std::max(eps_j * 10.0, 1e-10);
      }
    }

    double slope = cur.grad.dot(d);
    if (!(slope > 0.0)) {  // safeguard: fall back to steepest ascent
      d = cur.grad;
      slope = grad_norm * grad_norm;
    }

    double step = 1.0;
    Eval trial = evaluate(ctx, y + d);
    int backtracks = 0;
    while (trial.value < cur.value + 1e-4 * step * slope && backtracks < 50) {
      step *= 0.5;
      trial = evaluate(ctx, y + step * d);
      ++backtracks;
    }
    res.linesearch_backtracks += backtracks;
    if (backtracks >= 50 && trial.value <= cur.value) break;  // no usable step

    // Progress floor: once neither the objective nor the gradient moves
    // beyond evaluation precision, further iterations only burn the budget.
    const bool stalled =
        trial.value - cur.value <= 1e-15 * (1.0 + std::abs(cur.value)) &&
        trial.grad.norm() > 0.9 * grad_norm;

    y += step * d;
    cur = std::move(trial);
    grad_norm = cur.grad.norm();
    res.grad_history.push_back(grad_norm);
    res.value_history.push_back(cur.value);
    ++res.newton_iters;
    if (stalled) break;
  }

  res.y = std::move(y);
  res.x_new = cur.zres.z;
  res.grad_norm = grad_norm;
  res.converged = grad_norm <= tol;
  return res;
}

namespace {

// Accelerated proximal-gradient presolve used when no primal warm start is
// supplied.  A few hundred O(mn) sweeps bring the KKT residual down to the
// 1e-3 range where the Newton phase takes over, at no cost to the Newton
// iteration budget.
Vector proximal_gradient_presolve(const Problem& problem, double lambda,
                                  double tau, double target) {
  const ConstraintSpec spec{problem.mu, problem.c, lambda * tau};
  Vector x = Vector::Zero(problem.cols());
  Vector v = x;
  double t = 1.0;
  for (int it = 0; it < 500; ++it) {
    const Vector grad =
        problem.A.transpose() * loss_gradient(problem.loss, problem.A * v);
    Vector x_next = prox_affine_l1(v - tau * grad, spec).z;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    t = t_next;
    if (it % 25 == 24 && kkt_residual(problem, lambda, x) <= target) break;
  }
  return x;
}

}  // namespace

double kkt_residual(const Problem& problem, double lambda, const Vector& x) {
  const Vector Ax = problem.A * x;
  const Vector g = problem.A.transpose() * loss_gradient(problem.loss, Ax);
  const ProxResult pr =
      prox_affine_l1(x - g, ConstraintSpec{problem.mu, problem.c, lambda});
  return (x - pr.z).norm() / (1.0 + x.norm());
}

double objective_value(const Problem& problem, double lambda, const Vector& x) {
  return loss_value(problem.loss, problem.A * x) + lambda * x.lpNorm<1>();
}

SolveResult solve_ppa(const Problem& problem, double lambda,
                      const SolveOptions& options) {
  if (!problem.valid()) throw std::invalid_argument("solve_ppa: invalid problem");
  if (lambda <= 0.0) throw std::invalid_argument("solve_ppa: requires lambda > 0");
  const auto t0 = Clock::now();

  const Index m = problem.rows();
  const Index n = problem.cols();
  OuterSchedule schedule;
  schedule.tau = estimate_tau(problem.A);
  schedule.sigma_cap = options.sigma_cap;

  Vector x = options.x0
                 ? *options.x0
                 : proximal_gradient_presolve(problem, lambda, schedule.tau,
                                              std::max(1e-3, options.tol));
  if (x.size() != n)
    throw std::invalid_argument("solve_ppa: warm start dimension mismatch");
  // Without a dual warm start, seed from the loss gradient: the subproblem
  // dual optimum is grad f(Ax) + O(1/sigma) around the anchor.
  Vector y = options.y0 ? *options.y0
                        : loss_gradient(problem.loss, problem.A * x).eval();
  if (y.size() != m)
    throw std::invalid_argument("solve_ppa: warm start dimension mismatch");

  SolveResult result;
  result.converged = false;

  // Track the best iterate seen, returned when the outer cap is exceeded.
  double best_kkt = std::numeric_limits<double>::infinity();
  Vector best_x = x, best_y = y;

  int k = 0;
  for (; k < options.max_outer; ++k) {
    const double kkt = kkt_residual(problem, lambda, x);
    if (kkt < best_kkt) {
      best_kkt = kkt;
      best_x = x;
      best_y = y;
    }
    if (kkt <= options.tol) {
      result.converged = true;
      break;
    }

    const double sigma = schedule.sigma(k);
    const double eps_k = schedule.epsilon(k);
    SubproblemContext ctx(problem, lambda, sigma, schedule.tau, x);

    OuterRecord record;
    record.kkt_residual = kkt;
    Vector x_new = x;
    double inner_tol = std::min(1e-2, eps_k * eps_k);
    for (int attempt = 0; attempt < 12; ++attempt) {
      InnerResult inner = ssn_maximize(ctx, y, inner_tol, options.max_inner);
      y = inner.y;
      x_new = inner.x_new;
      record.newton_iters += inner.newton_iters;

      const Vector Ax_new = problem.A * x_new;
      const double Fk = primal_value(ctx, x_new, Ax_new);
      const double Gk = dual_value(ctx, y);
      record.gap = Fk - Gk;
      const Vector dx = x_new - x;
      const Vector Adx = Ax_new - ctx.Ax_anchor;
      const double drift = dx.squaredNorm() + schedule.tau * Adx.squaredNorm();
      record.gap_bound =
          (eps_k * eps_k / (2.0 * sigma)) * std::min(1.0, drift);
      record.primal_value = Fk;
      const double floor = 1e-13 * (1.0 + std::abs(Fk));
      if (record.gap <= std::max(record.gap_bound, floor)) break;
      // The recovered primal point may already certify the outer tolerance;
      // polishing the gap further only burns Newton iterations.
      if (kkt_residual(problem, lambda, x_new) <= options.tol) break;
      // A stalled inner solve hit the precision floor of the dual evaluation.
      if (!inner.converged && inner.newton_iters < options.max_inner) break;
      if (inner_tol <= 1e-14) break;
      inner_tol = std::max(inner_tol * 1e-2, 1e-14);
    }

    x = x_new;
    record.feasibility = std::abs(problem.mu.dot(x) - problem.c);
    result.total_newton_iters += record.newton_iters;
    result.history.push_back(record);
  }

  if (!result.converged) {
    // Outer cap exceeded: hand back whichever iterate certified best.
    const double final_kkt = kkt_residual(problem, lambda, x);
    if (final_kkt <= best_kkt) {
      best_kkt = final_kkt;
      best_x = x;
      best_y = y;
    }
    x = std::move(best_x);
    y = std::move(best_y);
    result.converged = best_kkt <= options.tol;
  }
  result.x = x;
  result.y = y;
  result.outer_iters = k;
  result.objective = objective_value(problem, lambda, x);
  result.kkt_residual = kkt_residual(problem, lambda, x);
  result.feasibility = std::abs(problem.mu.dot(x) - problem.c);
  result.seconds = seconds_since(t0);
  return result;
}

}  // namespace aclasso

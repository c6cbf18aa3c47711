#include "aclasso/reference.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aclasso {
namespace reference {

namespace {

constexpr double kPatternTol = 1e-11;

// Least-squares x-block solve for penalty 1: (A'A + I) x = rhs, routed
// through the m x m Gram matrix when m < n.
struct LeastSquaresBlock {
  const Matrix* A = nullptr;
  bool wide = false;
  Eigen::LLT<Matrix> llt;

  explicit LeastSquaresBlock(const Matrix& A_) : A(&A_) {
    wide = A_.rows() < A_.cols();
    if (wide) {
      Matrix G = Matrix::Identity(A_.rows(), A_.rows());
      G.noalias() += A_ * A_.transpose();
      llt.compute(G);
    } else {
      Matrix G = Matrix::Identity(A_.cols(), A_.cols());
      G.noalias() += A_.transpose() * A_;
      llt.compute(G);
    }
  }

  Vector solve(const Vector& rhs) const {
    if (!wide) return llt.solve(rhs);
    return rhs - A->transpose() * llt.solve((*A) * rhs);
  }
};

// Damped Newton for the logistic x-block:
// min f(Ax) + 0.5*||x - v||^2 with f the logistic loss.
Vector logistic_block_solve(const Problem& problem, const Vector& v,
                            Vector x) {
  const Matrix& A = problem.A;
  const double tol = 1e-12 * (1.0 + v.norm());
  for (int it = 0; it < 100; ++it) {
    const Vector Ax = A * x;
    const Vector g = A.transpose() * loss_gradient(problem.loss, Ax) + (x - v);
    if (g.norm() <= tol) break;

    Vector d(Ax.size());
    for (Index i = 0; i < Ax.size(); ++i) {
      const double b = problem.loss.anchor[i];
      const double e = 1.0 / (1.0 + std::exp(b * Ax[i]));
      d[i] = e * (1.0 - e);  // b^2 = 1 for +-1 labels
    }
    Matrix H = Matrix::Identity(A.cols(), A.cols());
    H.noalias() += A.transpose() * d.asDiagonal() * A;
    const Vector step = Eigen::LLT<Matrix>(H).solve(g);

    double t = 1.0;
    const double phi0 =
        loss_value(problem.loss, Ax) + 0.5 * (x - v).squaredNorm();
    const double slope = g.dot(step);
    for (int ls = 0; ls < 60; ++ls) {
      const Vector xt = x - t * step;
      const double phit =
          loss_value(problem.loss, A * xt) + 0.5 * (xt - v).squaredNorm();
      if (phit <= phi0 - 1e-4 * t * slope) break;
      t *= 0.5;
    }
    x -= t * step;
  }
  return x;
}

}  // namespace

Vector prox_bruteforce(const Vector& x, const ConstraintSpec& spec) {
  const Index n = x.size();
  if (n > 12) throw std::invalid_argument("prox_bruteforce: n > 12");
  if (spec.lambda <= 0.0)
    throw std::invalid_argument("prox_bruteforce: requires lambda > 0");
  for (Index i = 0; i < n; ++i)
    if (spec.mu[i] == 0.0)
      throw std::invalid_argument("prox_bruteforce: requires mu_i != 0");

  const double lambda = spec.lambda;
  long patterns = 1;
  for (Index i = 0; i < n; ++i) patterns *= 3;

  Vector best;
  double best_obj = std::numeric_limits<double>::infinity();

  std::vector<int> sign(static_cast<std::size_t>(n));  // 0, +1, -1
  for (long code = 0; code < patterns; ++code) {
    long rem = code;
    bool any_support = false;
    for (Index i = 0; i < n; ++i) {
      const int digit = static_cast<int>(rem % 3);
      rem /= 3;
      sign[static_cast<std::size_t>(i)] = digit == 0 ? 0 : (digit == 1 ? 1 : -1);
      any_support = any_support || digit != 0;
    }

    Vector z = Vector::Zero(n);
    double w = 0.0;
    if (!any_support) {
      if (spec.c != 0.0) continue;
      // Need some w with every coordinate inside its threshold interval.
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n; ++i) {
        lo = std::max(lo, x[i] / spec.mu[i] - lambda / std::abs(spec.mu[i]));
        hi = std::min(hi, x[i] / spec.mu[i] + lambda / std::abs(spec.mu[i]));
      }
      if (lo > hi + kPatternTol) continue;
    } else {
      double num = -spec.c, den = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (sign[static_cast<std::size_t>(i)] == 0) continue;
        num += spec.mu[i] *
               (x[i] - sign[static_cast<std::size_t>(i)] * lambda);
        den += spec.mu[i] * spec.mu[i];
      }
      w = num / den;
      bool ok = true;
      for (Index i = 0; i < n && ok; ++i) {
        const double shift = w * spec.mu[i];
        const double tol =
            kPatternTol * (1.0 + std::abs(x[i]) + std::abs(shift) + lambda);
        const int s = sign[static_cast<std::size_t>(i)];
        if (s == 0) {
          ok = std::abs(x[i] - shift) <= lambda + tol;
        } else {
          const double zi = x[i] - shift - s * lambda;
          ok = s * zi > -tol;
          z[i] = zi;
        }
      }
      if (!ok) continue;
    }

    const double obj = 0.5 * (z - x).squaredNorm() + lambda * z.lpNorm<1>();
    if (obj < best_obj) {
      best_obj = obj;
      best = z;
    }
  }

  if (best.size() == 0)
    throw std::logic_error("prox_bruteforce: no consistent sign pattern");
  return best;
}

AdmmResult admm_baseline(const Problem& problem, double lambda, int max_iters,
                         double tol) {
  if (!problem.valid())
    throw std::invalid_argument("admm_baseline: invalid problem");
  const Index n = problem.cols();
  const ConstraintSpec spec{problem.mu, problem.c, lambda};  // penalty = 1

  Vector x = Vector::Zero(n);
  Vector z = Vector::Zero(n);
  Vector u = Vector::Zero(n);

  const bool least_squares = problem.loss.kind == LossKind::least_squares;
  std::optional<LeastSquaresBlock> ls_block;
  Vector Atb;
  if (least_squares) {
    ls_block.emplace(problem.A);
    Atb = problem.A.transpose() * problem.loss.anchor;
  }

  AdmmResult result;
  for (result.iters = 0; result.iters < max_iters; ++result.iters) {
    if (least_squares)
      x = ls_block->solve(Atb + (z - u));
    else
      x = logistic_block_solve(problem, z - u, x);

    const Vector z_prev = z;
    z = prox_affine_l1(x + u, spec).z;
    u += x - z;

    result.primal_residual = (x - z).norm();
    result.dual_residual = (z - z_prev).norm();
    const double scale = tol * (1.0 + z.norm());
    if (result.primal_residual <= scale && result.dual_residual <= scale) {
      ++result.iters;
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.z = z;
  return result;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& map,
                   const Vector& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("fd_jacobian: h <= 0");
  Vector probe = x;
  probe[0] += h;
  const Index rows = map(probe).size();
  Matrix J(rows, x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    J.col(j) = (map(hi) - map(lo)) / (2.0 * h);
  }
  return J;
}

}  // namespace reference
}  // namespace aclasso

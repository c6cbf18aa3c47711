#pragma once

#include "aclasso/prox.hpp"

// Loss functions with the scaled proximal mappings, Moreau envelopes and
// prox Jacobians the dual subproblem needs.  Both supported losses are
// separable across residual coordinates, so all maps here are coordinatewise.
//
// Further losses (a square-root loss, say) plug in by extending LossKind and
// the four maps below; the solver only consumes this interface.

namespace aclasso {

enum class LossKind { least_squares, logistic };

struct Loss {
  LossKind kind = LossKind::least_squares;
  Vector anchor;  // least squares: targets b; logistic: labels in {-1,+1}

  bool valid() const;
};

// Element of the prox Jacobian: a uniform scaling of the identity (least
// squares) or a per-coordinate diagonal (logistic).  Entries lie in (0, 1].
struct ProxJacobianRep {
  double scale = 1.0;
  Vector diag;  // empty means uniform

  bool is_diagonal() const { return diag.size() > 0; }
  double entry(Index i) const { return is_diagonal() ? diag[i] : scale; }
  Vector apply(const Vector& v) const;
};

// 0.5*||z - b||^2, or sum_i log(1 + exp(-b_i z_i)).
double loss_value(const Loss& loss, const Vector& z);

// Gradient of the loss at z (used by the KKT residual of the original
// problem).
Vector loss_gradient(const Loss& loss, const Vector& z);

// argmin_p { alpha*loss(p) + 0.5*||p - v||^2 }.  Least squares is closed
// form; the logistic case solves the scalar optimality equation
//   p - v_i - alpha*b_i/(1 + exp(b_i p)) = 0
// per coordinate by safeguarded Newton on the bracket [v_i-alpha, v_i+alpha].
Vector loss_prox(const Loss& loss, const Vector& v, double alpha);

ProxJacobianRep loss_prox_jacobian(const Loss& loss, const Vector& v,
                                   double alpha);

// Value of the minimization defining the prox, evaluated at the prox point.
double moreau_envelope(const Loss& loss, const Vector& v, double alpha);

}  // namespace aclasso

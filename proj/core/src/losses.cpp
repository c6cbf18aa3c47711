#include "aclasso/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace aclasso {

namespace {

// log(1 + exp(-t)) without overflow for large |t|.
inline double log1p_exp_neg(double t) {
  return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// 1 / (1 + exp(t)); decays to 0 for large t, tends to 1 for very negative t.
inline double inv_one_plus_exp(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Root of g(p) = p - v - alpha*b/(1 + exp(b*p)), increasing in p with the
// root bracketed by [v - alpha, v + alpha] since |b/(1 + exp(b*p))| <= 1.
double logistic_scalar_prox(double v, double b, double alpha) {
  double lo = v - alpha * std::abs(b);
  double hi = v + alpha * std::abs(b);
  double p = v;
  for (int it = 0; it < 200; ++it) {
    const double h = inv_one_plus_exp(b * p);
    const double g = p - v - alpha * b * h;
    const double tol = 1e-13 * (1.0 + std::abs(v) + alpha * std::abs(b));
    if (std::abs(g) <= std::min(1e-12, tol) || hi - lo <= 4e-16 * (1.0 + std::abs(p)))
      return p;
    if (g > 0.0)
      hi = p;
    else
      lo = p;
    const double gp = 1.0 + alpha * b * b * h * (1.0 - h);
    double next = p - g / gp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    p = next;
  }
  return p;
}

double logistic_curvature(double p, double b) {
  const double h = inv_one_plus_exp(b * p);
  return b * b * h * (1.0 - h);
}

}  // namespace

bool Loss::valid() const {
  if (anchor.size() == 0) return false;
  if (kind == LossKind::logistic)
    for (Index i = 0; i < anchor.size(); ++i)
      if (anchor[i] != 1.0 && anchor[i] != -1.0) return false;
  return true;
}

Vector ProxJacobianRep::apply(const Vector& v) const {
  return is_diagonal() ? diag.cwiseProduct(v).eval() : (scale * v).eval();
}

double loss_value(const Loss& loss, const Vector& z) {
  if (z.size() != loss.anchor.size())
    throw std::invalid_argument("loss_value: dimension mismatch");
  if (loss.kind == LossKind::least_squares)
    return 0.5 * (z - loss.anchor).squaredNorm();
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i)
    total += log1p_exp_neg(loss.anchor[i] * z[i]);
  return total;
}

Vector loss_gradient(const Loss& loss, const Vector& z) {
  if (z.size() != loss.anchor.size())
    throw std::invalid_argument("loss_gradient: dimension mismatch");
  if (loss.kind == LossKind::least_squares) return z - loss.anchor;
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double b = loss.anchor[i];
    g[i] = -b * inv_one_plus_exp(b * z[i]);
  }
  return g;
}

Vector loss_prox(const Loss& loss, const Vector& v, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("loss_prox: alpha <= 0");
  if (v.size() != loss.anchor.size())
    throw std::invalid_argument("loss_prox: dimension mismatch");
  if (loss.kind == LossKind::least_squares)
    return (v + alpha * loss.anchor) / (1.0 + alpha);
  Vector p(v.size());
  for (Index i = 0; i < v.size(); ++i)
    p[i] = logistic_scalar_prox(v[i], loss.anchor[i], alpha);
  return p;
}

ProxJacobianRep loss_prox_jacobian(const Loss& loss, const Vector& v,
                                   double alpha) {
  if (alpha <= 0.0)
    throw std::invalid_argument("loss_prox_jacobian: alpha <= 0");
  ProxJacobianRep rep;
  if (loss.kind == LossKind::least_squares) {
    rep.scale = 1.0 / (1.0 + alpha);
    return rep;
  }
  const Vector p = loss_prox(loss, v, alpha);
  rep.diag = Vector(v.size());
  for (Index i = 0; i < v.size(); ++i)
    rep.diag[i] = 1.0 / (1.0 + alpha * logistic_curvature(p[i], loss.anchor[i]));
  return rep;
}

double moreau_envelope(const Loss& loss, const Vector& v, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("moreau_envelope: alpha <= 0");
  const Vector p = loss_prox(loss, v, alpha);
  return alpha * loss_value(loss, p) + 0.5 * (p - v).squaredNorm();
}

}  // namespace aclasso

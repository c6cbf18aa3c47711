#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

// Proximal operator of the affine-constrained l1 regularizer
//
//     q(x) = ||x||_1 + indicator{ mu'x = c },
//
// evaluated through a scalar dual multiplier w: once w solves
// mu' * soft_threshold(x - w*mu, lambda) = c, the prox is the thresholded
// point itself.  The multiplier is located by sorting the 2n breakpoints
// (x_i +- lambda)/mu_i, bisecting over the piecewise-affine regions and
// solving the active region in closed form, for an O(n log n) total cost.
//
// The module also constructs elements of the B-subdifferential of the prox.
// Every element is an orthogonal projection of the structured form
// Diag(u) - (1/s) mu_masked mu_masked', which is kept in factored form and
// never materialized densely.

namespace aclasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct ConstraintSpec {
  Vector mu;          // constraint normal; must not be the zero vector
  double c = 0.0;     // right-hand side of mu'x = c
  double lambda = 0.0;  // l1 weight; 0 degenerates to hyperplane projection

  bool valid() const;
};

// Disjoint classification of [n] relative to the residuals d_i = x_i - w*mu_i:
// alpha: |d_i| > lambda (active), beta: |d_i| = lambda (boundary, within
// tolerance), gamma: |d_i| < lambda (thresholded to zero).
struct IndexPartition {
  std::vector<Index> alpha_plus;
  std::vector<Index> alpha_minus;
  std::vector<Index> beta_plus;
  std::vector<Index> beta_minus;
  std::vector<Index> gamma;

  std::vector<Index> alpha() const;  // alpha_plus and alpha_minus, sorted
  Index total() const;
};

struct ProxResult {
  Vector z;                  // prox value, feasible: mu'z = c
  double w = 0.0;            // dual multiplier
  IndexPartition partition;  // classification at (x, w)
  bool degenerate_zero = false;  // c = 0 shortcut: prox vanished identically
};

// One B-subdifferential element N = Diag(mask) - (1/s) mu_masked mu_masked'.
// An all-zero mask (s = 0) encodes the zero operator on the constrained
// block; masked coordinates with mu_i = 0 contribute only to the diagonal.
struct BsubElement {
  Vector mask;       // 0/1 indicator of the active set S
  Vector mu_masked;  // Diag(mask) * mu
  double s = 0.0;    // sum of mu_j^2 over S
};

// Elementwise sign(v_i)(|v_i| - lambda)_+.
Vector soft_threshold(const Vector& v, double lambda);

// mu' * soft_threshold(x - w*mu, lambda): continuous, piecewise affine and
// non-increasing in w.  The multiplier solve finds its root at level c.
double constraint_value(const Vector& x, double w, const ConstraintSpec& spec);

struct MultiplierResult {
  double w = 0.0;
  double region_lo = 0.0;  // bracketing breakpoint interval (may be +-inf)
  double region_hi = 0.0;
  bool bisection_fallback = false;  // closed form failed the residual check
};

// Root of constraint_value(x, .) = c.  Requires mu_i != 0 for every i and
// lambda > 0; prox_affine_l1 strips zero-mu coordinates before calling.
MultiplierResult solve_multiplier(const Vector& x, const ConstraintSpec& spec);

// Interval [lo, hi] of multipliers at which every coordinate thresholds to
// zero; nonempty (lo <= hi) iff the prox vanishes in the c = 0 case.
// lo = max_i (x_i/mu_i - lambda/|mu_i|), hi = min_i (x_i/mu_i + lambda/|mu_i|).
struct VanishingInterval {
  double lo = 0.0;
  double hi = 0.0;
};
VanishingInterval vanishing_interval(const Vector& x, const ConstraintSpec& spec);

// Prox of lambda*q at x.  Coordinates with mu_i = 0 receive plain
// soft-thresholding; the remaining block goes through the multiplier solve
// (or the c = 0 vanishing shortcut).  lambda = 0 reduces to the hyperplane
// projection.
ProxResult prox_affine_l1(const Vector& x, const ConstraintSpec& spec);

// Classify every index given a multiplier w consistent with the constraint.
// A residual within tol*(1 + |x_i| + |w*mu_i|) of the threshold lands in the
// beta sets.
IndexPartition classify_indices(const Vector& x, double w,
                                const ConstraintSpec& spec,
                                double tol = 1e-12);

// B-subdifferential element for the mask alpha U beta_plus_sel U beta_minus_sel.
// Selections must be subsets of the partition's beta sets (throws otherwise).
BsubElement bsub_element(const IndexPartition& partition,
                         const ConstraintSpec& spec,
                         std::span<const Index> beta_plus_sel = {},
                         std::span<const Index> beta_minus_sel = {});

// Same, but honoring the degenerate c = 0 branch: when the prox vanished
// identically, the constrained block contributes the zero operator and only
// unconstrained (mu_i = 0) coordinates may stay in the mask.
BsubElement bsub_element(const ProxResult& prox, const ConstraintSpec& spec,
                         std::span<const Index> beta_plus_sel = {},
                         std::span<const Index> beta_minus_sel = {});

// Diag(u)v - (mu_masked'v / s) mu_masked in O(n), without forming N.
Vector apply_bsub(const BsubElement& elem, const Vector& v);

}  // namespace aclasso

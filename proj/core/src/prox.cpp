#include "aclasso/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aclasso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double scalar_threshold(double t, double lambda) {
  const double mag = std::abs(t) - lambda;
  return mag > 0.0 ? (t > 0.0 ? mag : -mag) : 0.0;
}

// Compensated accumulator; keeps constraint sums at O(eps) error independent
// of n, so the closed-form multiplier check stays meaningful for large inputs.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

bool contains_sorted(const std::vector<Index>& sorted, Index i) {
  return std::binary_search(sorted.begin(), sorted.end(), i);
}

}  // namespace

bool ConstraintSpec::valid() const {
  if (mu.size() == 0 || lambda < 0.0) return false;
  return (mu.array() != 0.0).any();
}

std::vector<Index> IndexPartition::alpha() const {
  std::vector<Index> out;
  out.reserve(alpha_plus.size() + alpha_minus.size());
  std::merge(alpha_plus.begin(), alpha_plus.end(), alpha_minus.begin(),
             alpha_minus.end(), std::back_inserter(out));
  return out;
}

Index IndexPartition::total() const {
  return static_cast<Index>(alpha_plus.size() + alpha_minus.size() +
                            beta_plus.size() + beta_minus.size() +
                            gamma.size());
}

Vector soft_threshold(const Vector& v, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("soft_threshold: lambda < 0");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = scalar_threshold(v[i], lambda);
  return out;
}

double constraint_value(const Vector& x, double w, const ConstraintSpec& spec) {
  KahanSum acc;
  for (Index i = 0; i < x.size(); ++i) {
    const double mi = spec.mu[i];
    if (mi == 0.0) continue;
    acc.add(mi * scalar_threshold(x[i] - w * mi, spec.lambda));
  }
  return acc.sum;
}

MultiplierResult solve_multiplier(const Vector& x, const ConstraintSpec& spec) {
  const Index n = x.size();
  if (n == 0) throw std::invalid_argument("solve_multiplier: empty input");
  if (spec.lambda <= 0.0)
    throw std::invalid_argument("solve_multiplier: requires lambda > 0");
  for (Index i = 0; i < n; ++i)
    if (spec.mu[i] == 0.0)
      throw std::invalid_argument("solve_multiplier: requires mu_i != 0");

  const double lambda = spec.lambda;
  const double c = spec.c;

  std::vector<double> bp(2 * static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    bp[2 * i] = (x[i] - lambda) / spec.mu[i];
    bp[2 * i + 1] = (x[i] + lambda) / spec.mu[i];
  }
  std::sort(bp.begin(), bp.end());

  // Region bisection over breakpoint indices, with sentinels at +-inf.
  // Invariant: f(y_{iLo}) > c >= f(y_{iHi}).
  const Index last = 2 * n + 1;
  Index iLo = 0, iHi = last;
  while (iHi - iLo > 1) {
    const Index j = (iLo + iHi) / 2;
    if (constraint_value(x, bp[j - 1], spec) > c)
      iLo = j;
    else
      iHi = j;
  }
  const double lo = (iLo == 0) ? -kInf : bp[iLo - 1];
  const double hi = (iHi == last) ? kInf : bp[iHi - 1];

  double wbar;
  if (std::isfinite(lo) && std::isfinite(hi))
    wbar = 0.5 * (lo + hi);
  else if (std::isfinite(hi))
    wbar = hi - 1.0;
  else
    wbar = lo + 1.0;

  // Closed-form root of the affine piece identified by the support of zbar.
  KahanSum num, den, mag;
  Index support = 0;
  for (Index i = 0; i < n; ++i) {
    const double zi = scalar_threshold(x[i] - wbar * spec.mu[i], lambda);
    if (zi == 0.0) continue;
    ++support;
    const double signed_shift = (zi > 0.0) ? lambda : -lambda;
    const double term = spec.mu[i] * (x[i] - signed_shift);
    num.add(term);
    mag.add(std::abs(term));
    den.add(spec.mu[i] * spec.mu[i]);
  }

  MultiplierResult result;
  result.region_lo = lo;
  result.region_hi = hi;

  if (support == 0) {
    // Prox vanishes on the whole region; any multiplier inside is valid
    // (possible only when c = 0).
    result.w = wbar;
    return result;
  }

  double w = (num.sum - c) / den.sum;
  const double scale = 1.0 + std::abs(c) + mag.sum + den.sum * std::abs(w);
  if (std::abs(constraint_value(x, w, spec) - c) > 1e-11 * scale) {
    // Closed form disagreed with the defining equation; bisect on w to
    // machine precision instead.
    result.bisection_fallback = true;
    double a = std::isfinite(lo) ? lo : wbar;
    double b = std::isfinite(hi) ? hi : wbar;
    double step = 1.0 + std::abs(wbar);
    while (constraint_value(x, a, spec) < c) {
      a -= step;
      step *= 2.0;
    }
    step = 1.0 + std::abs(wbar);
    while (constraint_value(x, b, spec) > c) {
      b += step;
      step *= 2.0;
    }
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (constraint_value(x, mid, spec) > c)
        a = mid;
      else
        b = mid;
    }
    w = 0.5 * (a + b);
  }
  result.w = w;
  return result;
}

VanishingInterval vanishing_interval(const Vector& x,
                                     const ConstraintSpec& spec) {
  VanishingInterval out{-kInf, kInf};
  for (Index i = 0; i < x.size(); ++i) {
    const double mi = spec.mu[i];
    if (mi == 0.0)
      throw std::invalid_argument("vanishing_interval: requires mu_i != 0");
    const double center = x[i] / mi;
    const double radius = spec.lambda / std::abs(mi);
    out.lo = std::max(out.lo, center - radius);
    out.hi = std::min(out.hi, center + radius);
  }
  return out;
}

ProxResult prox_affine_l1(const Vector& x, const ConstraintSpec& spec) {
  const Index n = x.size();
  if (spec.mu.size() != n)
    throw std::invalid_argument("prox_affine_l1: dimension mismatch");
  if (!spec.valid())
    throw std::invalid_argument("prox_affine_l1: invalid constraint spec");

  // Restrict the multiplier solve to coordinates actually constrained.
  std::vector<Index> constrained;
  constrained.reserve(n);
  for (Index i = 0; i < n; ++i)
    if (spec.mu[i] != 0.0) constrained.push_back(i);

  const Index k = static_cast<Index>(constrained.size());
  Vector xs(k), mus(k);
  for (Index j = 0; j < k; ++j) {
    xs[j] = x[constrained[j]];
    mus[j] = spec.mu[constrained[j]];
  }
  ConstraintSpec sub{mus, spec.c, spec.lambda};

  ProxResult result;
  if (spec.lambda == 0.0) {
    result.w = (mus.dot(xs) - spec.c) / mus.squaredNorm();
  } else if (spec.c == 0.0) {
    const VanishingInterval iv = vanishing_interval(xs, sub);
    if (iv.lo <= iv.hi) {
      result.degenerate_zero = true;
      result.w = 0.5 * (iv.lo + iv.hi);
    } else {
      result.w = solve_multiplier(xs, sub).w;
    }
  } else {
    result.w = solve_multiplier(xs, sub).w;
  }

  // mu_i = 0 coordinates see w*mu_i = 0, so one global threshold recombines
  // both blocks.
  result.z = Vector(n);
  for (Index i = 0; i < n; ++i)
    result.z[i] =
        scalar_threshold(x[i] - result.w * spec.mu[i], spec.lambda);
  result.partition = classify_indices(x, result.w, spec);
  return result;
}

IndexPartition classify_indices(const Vector& x, double w,
                                const ConstraintSpec& spec, double tol) {
  IndexPartition p;
  const double lambda = spec.lambda;
  for (Index i = 0; i < x.size(); ++i) {
    const double shift = w * spec.mu[i];
    const double d = x[i] - shift;
    const double thresh = tol * (1.0 + std::abs(x[i]) + std::abs(shift));
    if (d > lambda + thresh)
      p.alpha_plus.push_back(i);
    else if (d < -lambda - thresh)
      p.alpha_minus.push_back(i);
    else if (std::abs(d - lambda) <= thresh)
      p.beta_plus.push_back(i);
    else if (std::abs(d + lambda) <= thresh)
      p.beta_minus.push_back(i);
    else
      p.gamma.push_back(i);
  }
  return p;
}

namespace {

BsubElement build_element(const std::vector<Index>& mask_indices,
                          const ConstraintSpec& spec, Index n) {
  BsubElement elem;
  elem.mask = Vector::Zero(n);
  elem.mu_masked = Vector::Zero(n);
  elem.s = 0.0;
  for (Index i : mask_indices) {
    elem.mask[i] = 1.0;
    elem.mu_masked[i] = spec.mu[i];
    elem.s += spec.mu[i] * spec.mu[i];
  }
  return elem;
}

void validate_selection(std::span<const Index> sel,
                        const std::vector<Index>& beta, const char* which) {
  for (Index i : sel)
    if (!contains_sorted(beta, i))
      throw std::invalid_argument(std::string("bsub_element: selection not "
                                              "contained in ") +
                                  which);
}

}  // namespace

BsubElement bsub_element(const IndexPartition& partition,
                         const ConstraintSpec& spec,
                         std::span<const Index> beta_plus_sel,
                         std::span<const Index> beta_minus_sel) {
  validate_selection(beta_plus_sel, partition.beta_plus, "beta_plus");
  validate_selection(beta_minus_sel, partition.beta_minus, "beta_minus");

  std::vector<Index> mask_indices = partition.alpha();
  mask_indices.insert(mask_indices.end(), beta_plus_sel.begin(),
                      beta_plus_sel.end());
  mask_indices.insert(mask_indices.end(), beta_minus_sel.begin(),
                      beta_minus_sel.end());
  std::sort(mask_indices.begin(), mask_indices.end());
  return build_element(mask_indices, spec, spec.mu.size());
}

BsubElement bsub_element(const ProxResult& prox, const ConstraintSpec& spec,
                         std::span<const Index> beta_plus_sel,
                         std::span<const Index> beta_minus_sel) {
  if (!prox.degenerate_zero)
    return bsub_element(prox.partition, spec, beta_plus_sel, beta_minus_sel);

  // Degenerate c = 0 branch: the constrained block has the zero operator;
  // only unconstrained coordinates can stay active.
  validate_selection(beta_plus_sel, prox.partition.beta_plus, "beta_plus");
  validate_selection(beta_minus_sel, prox.partition.beta_minus, "beta_minus");
  std::vector<Index> mask_indices;
  auto keep_unconstrained = [&](const std::vector<Index>& ids) {
    for (Index i : ids)
      if (spec.mu[i] == 0.0) mask_indices.push_back(i);
  };
  keep_unconstrained(prox.partition.alpha_plus);
  keep_unconstrained(prox.partition.alpha_minus);
  for (Index i : beta_plus_sel)
    if (spec.mu[i] == 0.0) mask_indices.push_back(i);
  for (Index i : beta_minus_sel)
    if (spec.mu[i] == 0.0) mask_indices.push_back(i);
  std::sort(mask_indices.begin(), mask_indices.end());
  return build_element(mask_indices, spec, spec.mu.size());
}

Vector apply_bsub(const BsubElement& elem, const Vector& v) {
  if (v.size() != elem.mask.size())
    throw std::invalid_argument("apply_bsub: dimension mismatch");
  Vector out = elem.mask.cwiseProduct(v);
  if (elem.s > 0.0)
    out -= (elem.mu_masked.dot(v) / elem.s) * elem.mu_masked;
  return out;
}

}  // namespace aclasso

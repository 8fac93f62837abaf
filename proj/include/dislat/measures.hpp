#pragma once

#include "dislat/geometry.hpp"

#include <vector>

namespace dislat {

// Finite atomic vector measure on a convex domain.
struct AtomicMeasure {
  ConvexPolygon domain;
  std::vector<Vec2> points;
  std::vector<Vec2> weights;

  void add(const Vec2& x, const Vec2& w) {
    if (w.isZero(0.0)) return;
    points.push_back(x);
    weights.push_back(w);
  }
  std::size_t size() const { return points.size(); }
};

double total_variation(const AtomicMeasure& mu);

struct FlatNormOptions {
  // Above this atom count the flat norm is estimated by certified bounds
  // instead of the exact optimization.
  std::size_t exact_atom_cap = 512;
  // Angular grid for measures whose weights are not all parallel.
  int direction_samples = 720;
};

struct FlatNormResult {
  double value = 0.0;
  bool is_estimate = false;
  // Certified bracket; lower == upper == value on the exact path.
  double lower = 0.0;
  double upper = 0.0;
};

// Flat norm of mu: the supremum of |integral of phi d mu| over scalar
// Lipschitz phi compactly supported in the domain with
// sup|phi| + Lip(phi) <= 1.  Atoms must lie strictly inside the domain.
//
// Exact path: sweep over unit directions d of the inner linear program in the
// atom values phi_i and the split sup-bound/Lipschitz-bound (alpha, lambda);
// each inner problem is solved exactly through its dual, an uncapacitated
// transportation problem, with a concave line search over the split.
// Measures whose weights are all parallel need a single direction.
//
// Estimate path (beyond exact_atom_cap): reports a certified lower bound
// built from a feasible sign-matched test function, plus a certified upper
// bound from an opposite-weight pairing; value is the lower bound and
// is_estimate is set.
FlatNormResult flat_norm(const AtomicMeasure& mu, const FlatNormOptions& opts = {});

namespace detail {

// Exact value of   sup { sum_i c_i phi_i }   subject to
//   |phi_i| <= min(alpha, lambda * bdist_i),
//   |phi_i - phi_j| <= lambda * |x_i - x_j|,   alpha + lambda <= 1.
double scalar_flat_norm(const std::vector<Vec2>& pts, const std::vector<double>& bdist,
                        const std::vector<double>& c);

// Minimum cost of the balanced uncapacitated transportation problem with the
// given supplies, demands and nonnegative cost matrix (row-major
// supply x demand).  Successive shortest paths; exact up to rounding.
double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::vector<double>& cost);

}  // namespace detail

}  // namespace dislat

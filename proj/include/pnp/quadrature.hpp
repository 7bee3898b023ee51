#pragma once

#include "pnp/core.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>

namespace pnp {

/// Barycentric point and weight (weights sum to 1).
struct QuadPoint {
  double l0, l1, l2, w;
};

/// Dunavant's 7-point rule, exact for degree 5. All weights positive.
inline const std::array<QuadPoint, 7>& triangle_rule_deg5() {
  static const std::array<QuadPoint, 7> rule = [] {
    const double r15 = std::sqrt(15.0);
    const double a1 = (9.0 - 2.0 * r15) / 21.0, b1 = (6.0 + r15) / 21.0;
    const double a2 = (9.0 + 2.0 * r15) / 21.0, b2 = (6.0 - r15) / 21.0;
    const double w0 = 9.0 / 40.0;
    const double w1 = (155.0 + r15) / 1200.0;
    const double w2 = (155.0 - r15) / 1200.0;
    return std::array<QuadPoint, 7>{{
        {1.0 / 3, 1.0 / 3, 1.0 / 3, w0},
        {a1, b1, b1, w1},
        {b1, a1, b1, w1},
        {b1, b1, a1, w1},
        {a2, b2, b2, w2},
        {b2, a2, b2, w2},
        {b2, b2, a2, w2},
    }};
  }();
  return rule;
}

/// Mean value of f over triangle (a, b, c).
template <class F>
double triangle_mean(const F& f, Point a, Point b, Point c) {
  // Weights are positive, so the mean lies between the sampled extrema; the
  // clamp removes rounding excursions.
  double s = 0.0, wsum = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const QuadPoint& q : triangle_rule_deg5()) {
    const double v =
        f(Point{q.l0 * a.x + q.l1 * b.x + q.l2 * c.x, q.l0 * a.y + q.l1 * b.y + q.l2 * c.y});
    s += q.w * v;
    wsum += q.w;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::clamp(s / wsum, lo, hi);
}

}  // namespace pnp

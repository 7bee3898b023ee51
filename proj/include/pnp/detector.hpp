#pragma once

// Shock detector: alpha_i(x) in [0, 1], equal to 1 where x_i is a discrete
// extremum over its macroelement.

#include "pnp/core.hpp"
#include "pnp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pnp {

/// Jump of the directional difference quotients at a_i along r_ij.
inline double jump(const SymEntry& s, int i, const Field& x) {
  return (x[s.j] - x[i]) / s.r + (s.eval(x) - x[i]) / s.r_sym;
}

/// Mean of the absolute directional difference quotients at a_i along r_ij.
inline double mean(const SymEntry& s, int i, const Field& x) {
  return 0.5 * (std::abs(x[s.j] - x[i]) / s.r + std::abs(s.eval(x) - x[i]) / s.r_sym);
}

inline double jump(int i, int j, const Field& x, const SymStencil& st) {
  return jump(st.find(i, j), i, x);
}

inline double mean(int i, int j, const Field& x, const SymStencil& st) {
  return mean(st.find(i, j), i, x);
}

struct AlphaVector {
  std::vector<double> alpha;
  double q = 2.0;

  double operator[](int i) const { return alpha[i]; }
  int size() const { return static_cast<int>(alpha.size()); }
};

/// alpha_i = (|sum_j jump_ij| / sum_j 2 mean_ij)^q, 0 where the denominator
/// is below 1e-14.
inline AlphaVector compute_alpha(const Field& x, double q, const SymStencil& stencil) {
  if (!(q > 0.0)) throw std::invalid_argument("compute_alpha: q must be positive");
  const int n = stencil.num_nodes();
  if (x.size() != n) throw std::invalid_argument("compute_alpha: field size does not match mesh");
  AlphaVector out;
  out.q = q;
  out.alpha.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (const SymEntry& s : stencil.at(i)) {
      num += jump(s, i, x);
      den += 2.0 * mean(s, i, x);
    }
    if (den <= 1e-14) continue;
    const double ratio = std::min(std::abs(num) / den, 1.0);
    out.alpha[i] = q == 2.0 ? ratio * ratio : std::pow(ratio, q);
  }
  return out;
}

}  // namespace pnp

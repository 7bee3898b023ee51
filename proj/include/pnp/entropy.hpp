#pragma once

#include "pnp/core.hpp"

#include <cmath>
#include <string>

namespace pnp {

/// Entropy density g0(s) = s log s - s + 1 and its quadratic regularisation
/// g_eps below eps.
class EntropyFns {
 public:
  explicit EntropyFns(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("EntropyFns: epsilon must be positive");
    log_eps_ = std::log(eps_);
  }

  double epsilon() const { return eps_; }

  double g_eps(double s) const {
    if (s > eps_) return s * std::log(s) - s + 1.0;
    return (s * s - eps_ * eps_) / (2.0 * eps_) + (log_eps_ - 1.0) * s + 1.0;
  }

  double dg_eps(double s) const {
    if (s > eps_) return std::log(s);
    return s / eps_ + log_eps_ - 1.0;
  }

  /// g'_eps(b) - g'_eps(a), accurate when a and b are close.
  double dg_eps_difference(double a, double b) const {
    if (a > eps_ && b > eps_) return std::log1p((b - a) / a);
    return dg_eps(b) - dg_eps(a);
  }

  static double g0(double s) {
    check_domain(s, "g0");
    if (s == 0.0) return 1.0;
    return s * std::log(s) - s + 1.0;
  }

  static double dg0(double s) {
    check_domain(s, "g0'");
    return std::log(s);
  }

  static double d2g0(double s) {
    check_domain(s, "g0''");
    return 1.0 / s;
  }

 private:
  static void check_domain(double s, const char* name) {
    if (!(s >= 0.0)) throw DomainError(std::string(name) + " evaluated at negative argument " + std::to_string(s));
  }

  double eps_;
  double log_eps_;
};

}  // namespace pnp

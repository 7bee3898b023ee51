#pragma once

// Nonlinear graph-Laplacian stabilisers for the ion equations, the secant
// slopes tau_ji and the edge-based transport form used by the entropy-stable
// scheme.

#include "pnp/core.hpp"
#include "pnp/detector.hpp"
#include "pnp/entropy.hpp"
#include "pnp/fespace.hpp"
#include "pnp/mesh.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace pnp {

enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// Graph Laplacian with nonnegative edge weights `beta` (one per mesh edge).
struct StabMatrix {
  SparseMatrix matrix;
  std::vector<double> beta;
};

/// Values of a sparse matrix on the mesh edges, as (a_ij, a_ji) pairs.
inline std::vector<std::pair<double, double>> edge_entries(const Mesh& mesh, const SparseMatrix& a) {
  std::vector<std::pair<double, double>> out;
  out.reserve(mesh.edges().size());
  for (const auto& [i, j] : mesh.edges()) out.emplace_back(entry(a, i, j), entry(a, j, i));
  return out;
}

inline StabMatrix graph_laplacian(const Mesh& mesh, std::vector<double> beta) {
  std::vector<Triplet> t;
  t.reserve(4 * beta.size() + mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) t.emplace_back(i, i, 0.0);
  for (std::size_t e = 0; e < beta.size(); ++e) {
    const auto [i, j] = mesh.edges()[e];
    const double b = beta[e];
    t.emplace_back(i, j, -b);
    t.emplace_back(j, i, -b);
    t.emplace_back(i, i, b);
    t.emplace_back(j, j, b);
  }
  return {from_triplets(mesh.num_nodes(), t), std::move(beta)};
}

// ---------------------------------------------------------------------------
// First scheme

/// f^+-_ij = M_ij / k + K_ij +- G_ij.
inline std::pair<double, double> f1(int i, int j, double k, const SparseMatrix& mass,
                                    const SparseMatrix& stiffness, const SparseMatrix& drift) {
  if (!(k > 0.0)) throw std::invalid_argument("f1: time step must be positive");
  const double base = entry(mass, i, j) / k + entry(stiffness, i, j);
  const double g = entry(drift, i, j);
  return {base + g, base - g};
}

/// B1^+- built from beta_ij = max{alpha_i f_ij, alpha_j f_ji, 0}.
inline StabMatrix build_B1(Sign sign, const AlphaVector& alpha, double k, const Mesh& mesh,
                           const SparseMatrix& mass, const SparseMatrix& stiffness,
                           const SparseMatrix& drift) {
  if (!(k > 0.0)) throw std::invalid_argument("build_B1: time step must be positive");
  const double sg = sign_value(sign);
  std::vector<double> beta(mesh.edges().size(), 0.0);
  for (std::size_t e = 0; e < beta.size(); ++e) {
    const auto [i, j] = mesh.edges()[e];
    if (alpha[i] == 0.0 && alpha[j] == 0.0) continue;
    const double base = entry(mass, i, j) / k + entry(stiffness, i, j);
    const double f_ij = base + sg * entry(drift, i, j);
    const double f_ji = base + sg * entry(drift, j, i);
    beta[e] = std::max({alpha[i] * f_ij, alpha[j] * f_ji, 0.0});
  }
  return graph_laplacian(mesh, std::move(beta));
}

// ---------------------------------------------------------------------------
// Second scheme

/// Secant slope tau_ji(x) = delta x / delta g'_eps(x), or max{x_i, eps} when
/// the two values coincide. Symmetric in (i, j).
inline double tau(double xi, double xj, const EntropyFns& fns) {
  if (xj == xi) return std::max(xi, fns.epsilon());
  const double lo = std::min(xi, xj), hi = std::max(xi, xj);
  const double dg = fns.dg_eps_difference(lo, hi);
  if (dg == 0.0) return std::max(lo, fns.epsilon());
  return (hi - lo) / dg;
}

inline double tau(int i, int j, const Field& x, const EntropyFns& fns) {
  return tau(x[i], x[j], fns);
}

/// Row load of the edge-based transport form:
/// s_i = sum_j tau_ij (phi_j - phi_i) K_ij, so that
/// (x grad phi, grad xbar)_* = xbar . s.
inline Field star_load(const Field& x, const Field& phi, const EntropyFns& fns, const Mesh& mesh,
                       const std::vector<std::pair<double, double>>& k_edges) {
  Field s = Field::Zero(mesh.num_nodes());
  for (std::size_t e = 0; e < k_edges.size(); ++e) {
    const auto [i, j] = mesh.edges()[e];
    const double kij = k_edges[e].first;
    if (kij == 0.0) continue;
    const double flux = tau(x[i], x[j], fns) * (phi[j] - phi[i]) * kij;
    s[i] += flux;
    s[j] -= flux;
  }
  return s;
}

/// Splitting of star_load for Picard linearisation: star_load(x) equals
/// matrix * x + load at the same x. On each edge tau is written as
/// c (x_i + x_j) / 2 with c frozen, so the mean is implicit; edges whose
/// mean does not exceed eps stay in the explicit load.
struct StarSplit {
  SparseMatrix matrix;
  Field load;
};

inline StarSplit star_split(const Field& x, const Field& phi, const EntropyFns& fns, const Mesh& mesh,
                            const std::vector<std::pair<double, double>>& k_edges) {
  Field load = Field::Zero(mesh.num_nodes());
  std::vector<Triplet> t;
  t.reserve(4 * k_edges.size());
  for (std::size_t e = 0; e < k_edges.size(); ++e) {
    const auto [i, j] = mesh.edges()[e];
    const double kij = k_edges[e].first;
    if (kij == 0.0) continue;
    const double flux = tau(x[i], x[j], fns) * (phi[j] - phi[i]) * kij;
    const double mean = 0.5 * (x[i] + x[j]);
    if (!(mean > fns.epsilon())) {
      load[i] += flux;
      load[j] -= flux;
      continue;
    }
    const double c = 0.5 * flux / mean;
    t.emplace_back(i, i, c);
    t.emplace_back(i, j, c);
    t.emplace_back(j, i, -c);
    t.emplace_back(j, j, -c);
  }
  return {from_triplets(mesh.num_nodes(), t), std::move(load)};
}

/// (x grad phi, grad xbar)_* = -sum_{i<j} tau_ji delta_ji phi delta_ji xbar K_ij.
inline double star_transport(const Field& x, const Field& phi, const Field& xbar,
                             const EntropyFns& fns, const Mesh& mesh, const SparseMatrix& stiffness) {
  double sum = 0.0;
  for (const auto& [i, j] : mesh.edges()) {
    const double kij = entry(stiffness, i, j);
    if (kij == 0.0) continue;
    sum -= tau(x[i], x[j], fns) * (phi[j] - phi[i]) * (xbar[j] - xbar[i]) * kij;
  }
  return sum;
}

namespace detail {

// Coefficient of delta_ji phi in f_ij: 1/delta g' - max{x_i, eps}/delta x,
// written as (tau - max{x_i, eps}) / delta x to avoid cancellation.
inline double f2_bracket(double xi, double xj, const EntropyFns& fns) {
  return (tau(xi, xj, fns) - std::max(xi, fns.epsilon())) / (xj - xi);
}

}  // namespace detail

/// (f^+_ij, f^-_ij) of the entropy-stable stabiliser; zero when x_j = x_i.
inline std::pair<double, double> f2(int i, int j, const Field& x, const Field& phi,
                                    const EntropyFns& fns, const SparseMatrix& stiffness) {
  if (x[j] == x[i]) return {0.0, 0.0};
  const double kij = entry(stiffness, i, j);
  const double c = (phi[j] - phi[i]) * detail::f2_bracket(x[i], x[j], fns);
  return {(1.0 + c) * kij, (1.0 - c) * kij};
}

/// B2^+- built from beta~_ij = max{alpha_i f_ij, alpha_j f_ji, 0}.
inline StabMatrix build_B2(Sign sign, const Field& x, const Field& phi, const AlphaVector& alpha,
                           const EntropyFns& fns, const Mesh& mesh,
                           const std::vector<std::pair<double, double>>& k_edges) {
  const double sg = sign_value(sign);
  std::vector<double> beta(mesh.edges().size(), 0.0);
  for (std::size_t e = 0; e < beta.size(); ++e) {
    const auto [i, j] = mesh.edges()[e];
    if ((alpha[i] == 0.0 && alpha[j] == 0.0) || x[i] == x[j]) continue;
    const double kij = k_edges[e].first;
    const double dphi = phi[j] - phi[i];
    const double f_ij = (1.0 + sg * dphi * detail::f2_bracket(x[i], x[j], fns)) * kij;
    const double f_ji = (1.0 - sg * dphi * detail::f2_bracket(x[j], x[i], fns)) * kij;
    beta[e] = std::max({alpha[i] * f_ij, alpha[j] * f_ji, 0.0});
  }
  return graph_laplacian(mesh, std::move(beta));
}

inline StabMatrix build_B2(Sign sign, const Field& x, const Field& phi, const AlphaVector& alpha,
                           const EntropyFns& fns, const Mesh& mesh, const SparseMatrix& stiffness) {
  return build_B2(sign, x, phi, alpha, fns, mesh, edge_entries(mesh, stiffness));
}

}  // namespace pnp

#pragma once

// P1 finite element machinery on triangles.

#include "pnp/core.hpp"
#include "pnp/mesh.hpp"
#include "pnp/quadrature.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace pnp {

using ScalarFunction = std::function<double(Point)>;

/// Constant gradients of the three barycentric coordinates of element e.
inline std::array<Point, 3> barycentric_gradients(const Mesh& mesh, int e) {
  const Element& el = mesh.element(e);
  const double two_area = 2.0 * mesh.area(e);
  std::array<Point, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Point& a = mesh.node(el[(k + 1) % 3]);
    const Point& b = mesh.node(el[(k + 2) % 3]);
    g[k] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
  }
  return g;
}

inline SparseMatrix from_triplets(int n, const std::vector<Triplet>& t) {
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

/// M_ij = (phi_j, phi_i).
inline SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    const double a = mesh.area(e);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.emplace_back(el[r], el[c], r == c ? a / 6.0 : a / 12.0);
  }
  return from_triplets(mesh.num_nodes(), t);
}

/// Diagonal D_ii = (phi_i, 1); (x, y)_h = sum_i D_ii x_i y_i.
inline SparseMatrix assemble_lumped_mass(const Mesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(3 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double a = mesh.area(e) / 3.0;
    for (int v : mesh.element(e)) t.emplace_back(v, v, a);
  }
  return from_triplets(mesh.num_nodes(), t);
}

/// K_ij = (grad phi_j, grad phi_i).
inline SparseMatrix assemble_stiffness(const Mesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    const double a = mesh.area(e);
    const auto g = barycentric_gradients(mesh, e);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.emplace_back(el[r], el[c], a * dot(g[r], g[c]));
  }
  return from_triplets(mesh.num_nodes(), t);
}

/// G_ij = (phi_j grad(phi_h), grad phi_i). The integrand is linear on each
/// element, so the element contribution is |E|/3 grad(phi_h) . grad(lambda_i).
inline SparseMatrix assemble_drift(const Mesh& mesh, const Field& phi) {
  if (phi.size() != mesh.num_nodes())
    throw std::invalid_argument("assemble_drift: field size does not match mesh");
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    const double a3 = mesh.area(e) / 3.0;
    const auto g = barycentric_gradients(mesh, e);
    Point grad{0.0, 0.0};
    for (int k = 0; k < 3; ++k) grad = grad + phi[el[k]] * g[k];
    for (int r = 0; r < 3; ++r) {
      const double v = a3 * dot(grad, g[r]);
      for (int c = 0; c < 3; ++c) t.emplace_back(el[r], el[c], v);
    }
  }
  return from_triplets(mesh.num_nodes(), t);
}

/// i_h f: values at the nodes.
inline Field nodal_interpolate(const ScalarFunction& f, const Mesh& mesh) {
  Field x(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    x[i] = f(mesh.node(i));
    if (!std::isfinite(x[i]))
      throw DomainError("nodal_interpolate: non-finite value at node " + std::to_string(i));
  }
  return x;
}

/// Element E_{a_i} used by the averaged interpolant: the adjacent element
/// with the smallest index.
inline int designated_element(const Mesh& mesh, int i) {
  const auto els = mesh.node_elements(i);
  return *std::min_element(els.begin(), els.end());
}

/// I_h f: each nodal value is the mean of f over the designated element,
/// integrated with the 7-point degree-5 rule.
inline Field averaged_interpolate(const ScalarFunction& f, const Mesh& mesh) {
  Field x(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const int e = designated_element(mesh, i);
    const Element& el = mesh.element(e);
    x[i] = triangle_mean(f, mesh.node(el[0]), mesh.node(el[1]), mesh.node(el[2]));
  }
  return x;
}

/// Matrices that depend only on the mesh.
struct Assembly {
  SparseMatrix mass;
  SparseMatrix lumped;
  SparseMatrix stiffness;
  Field lumped_diag;

  static Assembly build(const Mesh& mesh) {
    Assembly a;
    a.mass = assemble_mass(mesh);
    a.lumped = assemble_lumped_mass(mesh);
    a.stiffness = assemble_stiffness(mesh);
    a.lumped_diag = a.lumped.diagonal();
    return a;
  }
};

}  // namespace pnp

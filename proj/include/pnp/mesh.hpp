#pragma once

// 2D triangular meshes: construction, macroelement adjacency, boundary
// classification, symmetric-node stencils and the acuteness check.

#include "pnp/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pnp {

enum class BoundaryTag { interior, bottom, top, membrane, other_boundary };

inline const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::bottom: return "bottom";
    case BoundaryTag::top: return "top";
    case BoundaryTag::membrane: return "membrane";
    case BoundaryTag::other_boundary: return "other_boundary";
  }
  return "?";
}

inline BoundaryTag tag_from_string(const std::string& name) {
  if (name == "bottom") return BoundaryTag::bottom;
  if (name == "top") return BoundaryTag::top;
  if (name == "membrane") return BoundaryTag::membrane;
  if (name == "other_boundary") return BoundaryTag::other_boundary;
  if (name == "interior") return BoundaryTag::interior;
  throw std::invalid_argument("unknown boundary tag '" + name + "'");
}

using Element = std::array<int, 3>;
using Edge = std::pair<int, int>;  // first < second

/// Maps a boundary node position to its tag.
using BoundaryTagger = std::function<BoundaryTag(Point)>;

class Mesh {
 public:
  /// Builds the connectivity of a triangulation. Elements must be
  /// counterclockwise with strictly positive area. Nodes on the boundary
  /// are classified by `tagger` (default: other_boundary).
  static Mesh from_triangles(std::vector<Point> nodes, std::vector<Element> elements,
                             const BoundaryTagger& tagger = {}) {
    Mesh m;
    m.nodes_ = std::move(nodes);
    m.elements_ = std::move(elements);
    const int nn = static_cast<int>(m.nodes_.size());
    if (nn < 3 || m.elements_.empty())
      throw std::invalid_argument("mesh needs at least one triangle");

    m.node_elements_.assign(nn, {});
    std::map<Edge, int> edge_count;
    m.h_ = 0.0;
    for (int e = 0; e < static_cast<int>(m.elements_.size()); ++e) {
      const Element& el = m.elements_[e];
      for (int v : el)
        if (v < 0 || v >= nn)
          throw std::invalid_argument("element " + std::to_string(e) + " references missing node");
      const double a = m.area(e);
      if (!(a > 0.0))
        throw std::invalid_argument("element " + std::to_string(e) +
                                    " is not counterclockwise with positive area");
      for (int k = 0; k < 3; ++k) {
        m.node_elements_[el[k]].push_back(e);
        const int u = el[k], v = el[(k + 1) % 3];
        ++edge_count[{std::min(u, v), std::max(u, v)}];
        m.h_ = std::max(m.h_, norm(m.nodes_[u] - m.nodes_[v]));
      }
    }

    m.neighbors_.assign(nn, {});
    for (int i = 0; i < nn; ++i) {
      auto& nb = m.neighbors_[i];
      nb.push_back(i);
      for (int e : m.node_elements_[i])
        for (int v : m.elements_[e]) nb.push_back(v);
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    m.tags_.assign(nn, BoundaryTag::interior);
    for (const auto& [edge, count] : edge_count) {
      m.edges_.push_back(edge);
      if (count == 1) {
        m.boundary_edges_.push_back(edge);
        m.tags_[edge.first] = BoundaryTag::other_boundary;
        m.tags_[edge.second] = BoundaryTag::other_boundary;
      } else if (count > 2) {
        throw std::invalid_argument("non-manifold edge (" + std::to_string(edge.first) + "," +
                                    std::to_string(edge.second) + ")");
      }
    }
    if (tagger)
      for (int i = 0; i < nn; ++i)
        if (m.tags_[i] != BoundaryTag::interior) {
          m.tags_[i] = tagger(m.nodes_[i]);
          if (m.tags_[i] == BoundaryTag::interior)
            throw std::invalid_argument("tagger classified boundary node " + std::to_string(i) +
                                        " as interior");
        }
    return m;
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[i]; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(int e) const { return elements_[e]; }

  /// I(Omega_{a_i}): sorted node indices of the macroelement, including i.
  std::span<const int> neighbors(int i) const { return neighbors_[i]; }
  std::span<const int> node_elements(int i) const { return node_elements_[i]; }

  /// Shared-support pairs (i < j), i.e. the mesh edges.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Edge>& boundary_edges() const { return boundary_edges_; }

  BoundaryTag tag(int i) const { return tags_[i]; }
  const std::vector<BoundaryTag>& tags() const { return tags_; }
  bool on_boundary(int i) const { return tags_[i] != BoundaryTag::interior; }
  bool has_tag(BoundaryTag t) const { return std::find(tags_.begin(), tags_.end(), t) != tags_.end(); }
  std::vector<int> nodes_with_tag(BoundaryTag t) const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
      if (tags_[i] == t) out.push_back(i);
    return out;
  }

  /// Maximum element diameter.
  double h() const { return h_; }

  double area(int e) const {
    const Element& el = elements_[e];
    return 0.5 * cross(nodes_[el[1]] - nodes_[el[0]], nodes_[el[2]] - nodes_[el[0]]);
  }

  double total_area() const {
    double s = 0.0;
    for (int e = 0; e < num_elements(); ++e) s += area(e);
    return s;
  }

 private:
  std::vector<Point> nodes_;
  std::vector<Element> elements_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> node_elements_;
  std::vector<Edge> edges_;
  std::vector<Edge> boundary_edges_;
  std::vector<BoundaryTag> tags_;
  double h_ = 0.0;
};

namespace detail {

// Structured triangulation of lattice cells; every cell is split along its
// lower-left to upper-right diagonal.
class LatticeBuilder {
 public:
  LatticeBuilder(Point origin, double dx, double dy) : origin_(origin), dx_(dx), dy_(dy) {}

  void add_cell(int i, int j) {
    const int a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1), d = node(i, j + 1);
    elements_.push_back({a, b, c});
    elements_.push_back({a, c, d});
  }

  Mesh build(const BoundaryTagger& tagger) {
    return Mesh::from_triangles(std::move(nodes_), std::move(elements_), tagger);
  }

 private:
  int node(int i, int j) {
    auto [it, inserted] = index_.try_emplace({i, j}, static_cast<int>(nodes_.size()));
    if (inserted) nodes_.push_back({origin_.x + i * dx_, origin_.y + j * dy_});
    return it->second;
  }

  Point origin_;
  double dx_, dy_;
  std::map<std::pair<int, int>, int> index_;
  std::vector<Point> nodes_;
  std::vector<Element> elements_;
};

inline bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace detail

/// n x n cells on the unit square [0,1]^2 shifted by `offset`; the default
/// offset gives (-1/2, 1/2)^2.
inline Mesh build_unit_square(int n, Point offset = {-0.5, -0.5}) {
  if (n < 2) throw std::invalid_argument("build_unit_square: n must be >= 2");
  detail::LatticeBuilder b(offset, 1.0 / n, 1.0 / n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b.add_cell(i, j);
  return b.build({});
}

inline BoundaryTag channel_tag(Point p) {
  using detail::near;
  if (near(p.y, 0.0)) return BoundaryTag::bottom;
  if (near(p.y, 7.0)) return BoundaryTag::top;
  if ((near(p.x, 1.0) || near(p.x, -1.0)) && p.y >= 1.5 - 1e-9 && p.y <= 5.5 + 1e-9)
    return BoundaryTag::membrane;
  return BoundaryTag::other_boundary;
}

/// Ion channel: two 4 x 1.5 reservoirs joined by a 2 x 4 channel, meshed on
/// a lattice of spacing `cell`.
inline Mesh build_channel(double cell) {
  if (!(cell > 0.0) || cell > 0.5 + 1e-12)
    throw std::invalid_argument("build_channel: cell must be in (0, 0.5]");
  const double ratio = 0.5 / cell;
  const long per_half = std::lround(ratio);
  if (per_half < 1 || std::abs(ratio - static_cast<double>(per_half)) > 1e-9)
    throw std::invalid_argument("build_channel: cell must divide 0.5");
  const int m = static_cast<int>(per_half);  // lattice steps per 0.5 units
  const int nx = 8 * m, ny = 14 * m;
  detail::LatticeBuilder b({-2.0, 0.0}, cell, cell);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double xc = -2.0 + (i + 0.5) * cell, yc = (j + 0.5) * cell;
      const bool reservoir = yc < 1.5 || yc > 5.5;
      if (reservoir || std::abs(xc) < 1.0) b.add_cell(i, j);
    }
  }
  return b.build(channel_tag);
}

/// Strictly acute triangulation of a rectangle: horizontal rows spaced
/// sqrt(3)/2 h apart, interior triangles equilateral, and the odd-row nodes
/// next to the vertical sides pulled to 0.92 h so no angle reaches 90 deg.
/// `nx` cells per row, `rows` (even) rows of triangles.
inline Mesh build_acute_rectangle(int nx, int rows, double width, Point center = {0.0, 0.0}) {
  if (nx < 2 || rows < 2 || rows % 2 != 0 || !(width > 0.0))
    throw std::invalid_argument("build_acute_rectangle: need nx >= 2, even rows >= 2, width > 0");
  const double h = width / nx;
  const double s = std::sqrt(3.0) / 2.0 * h;
  const double height = rows * s;
  const double x0 = center.x - 0.5 * width, y0 = center.y - 0.5 * height;
  const double pull = 0.92 * h;

  std::vector<Point> nodes;
  std::vector<std::vector<int>> row_nodes(rows + 1);
  for (int r = 0; r <= rows; ++r) {
    const double y = y0 + r * s;
    if (r % 2 == 0) {
      for (int i = 0; i <= nx; ++i) {
        row_nodes[r].push_back(static_cast<int>(nodes.size()));
        nodes.push_back({x0 + i * h, y});
      }
    } else {
      // x = pull, 1.5h, 2.5h, ..., width - 1.5h, width - pull
      for (int i = 0; i < nx; ++i) {
        double x = (i + 0.5) * h;
        if (i == 0) x = pull;
        if (i == nx - 1) x = width - pull;
        row_nodes[r].push_back(static_cast<int>(nodes.size()));
        nodes.push_back({x0 + x, y});
      }
    }
  }

  std::vector<Element> elements;
  for (int r = 0; r < rows; ++r) {
    const bool lower_even = r % 2 == 0;
    const auto& even = lower_even ? row_nodes[r] : row_nodes[r + 1];
    const auto& odd = lower_even ? row_nodes[r + 1] : row_nodes[r];
    // Band between an even row (nx+1 nodes) and an odd row (nx nodes).
    for (int i = 0; i < nx; ++i) {
      // Triangle with base on the even row.
      if (lower_even)
        elements.push_back({even[i], even[i + 1], odd[i]});
      else
        elements.push_back({even[i + 1], even[i], odd[i]});
      // Triangle with base on the odd row.
      if (i + 1 < nx) {
        if (lower_even)
          elements.push_back({even[i + 1], odd[i + 1], odd[i]});
        else
          elements.push_back({odd[i], odd[i + 1], even[i + 1]});
      }
    }
    // Boundary triangles spanning two rows on each vertical side are added
    // between consecutive even rows below.
  }
  for (int r = 1; r < rows; r += 2) {
    const auto& lo = row_nodes[r - 1];
    const auto& mid = row_nodes[r];
    const auto& hi = row_nodes[r + 1];
    elements.push_back({lo.front(), mid.front(), hi.front()});
    elements.push_back({lo.back(), hi.back(), mid.back()});
  }
  return Mesh::from_triangles(std::move(nodes), std::move(elements), {});
}

// ---------------------------------------------------------------------------
// Symmetric-node stencils

/// Symmetric point of neighbour j with respect to node i, on the macroelement
/// boundary, plus the convex weights that evaluate a Field there.
struct SymEntry {
  int j = -1;
  int n1 = -1, n2 = -1;
  double w1 = 1.0, w2 = 0.0;
  Point point;
  double r = 0.0;      // |a_j - a_i|
  double r_sym = 0.0;  // |a_sym - a_i|
  bool fallback = false;

  double eval(const Field& x) const { return w1 * x[n1] + w2 * x[n2]; }
};

class SymStencil {
 public:
  SymStencil() = default;
  SymStencil(std::vector<int> offsets, std::vector<SymEntry> entries)
      : offsets_(std::move(offsets)), entries_(std::move(entries)) {}

  /// Entries of node i, one per neighbour j != i in increasing j.
  std::span<const SymEntry> at(int i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }

  const SymEntry& find(int i, int j) const {
    for (const SymEntry& e : at(i))
      if (e.j == j) return e;
    throw std::out_of_range("no stencil entry for pair (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
  }

  int num_nodes() const { return static_cast<int>(offsets_.size()) - 1; }

 private:
  std::vector<int> offsets_;
  std::vector<SymEntry> entries_;
};

/// For each node i and neighbour j, intersects the ray from a_j through a_i
/// with the edges of Omega_{a_i} opposite to a_i. When a boundary node's ray
/// leaves the domain at once, the pair's own difference is duplicated.
inline SymStencil build_sym_stencils(const Mesh& mesh) {
  constexpr double tol = 1e-12;
  std::vector<int> offsets{0};
  std::vector<SymEntry> entries;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Point ai = mesh.node(i);
    for (int j : mesh.neighbors(i)) {
      if (j == i) continue;
      SymEntry s;
      s.j = j;
      const Point dir = ai - mesh.node(j);
      s.r = norm(dir);
      double best_t = std::numeric_limits<double>::infinity();
      for (int e : mesh.node_elements(i)) {
        const Element& el = mesh.element(e);
        int k = 0;
        while (el[k] != i) ++k;
        const int p = el[(k + 1) % 3], q = el[(k + 2) % 3];
        const Point P = mesh.node(p), Q = mesh.node(q);
        const Point pq = Q - P;
        const double denom = cross(dir, pq);
        if (std::abs(denom) < tol * s.r * norm(pq)) continue;  // parallel
        // ai + t dir = P + u pq
        const Point d0 = P - ai;
        const double t = cross(d0, pq) / denom;
        double u = cross(d0, dir) / denom;
        if (t <= tol || u < -1e-10 || u > 1.0 + 1e-10) continue;
        if (t < best_t) {
          best_t = t;
          u = std::clamp(u, 0.0, 1.0);
          s.n1 = p;
          s.n2 = q;
          s.w1 = 1.0 - u;
          s.w2 = u;
          s.point = ai + t * dir;
        }
      }
      if (s.n1 < 0) {
        if (!mesh.on_boundary(i))
          throw StencilError("symmetric node construction failed for pair (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
        s.fallback = true;
        s.n1 = s.n2 = j;
        s.w1 = 1.0;
        s.w2 = 0.0;
        s.point = mesh.node(j);
        s.r_sym = s.r;
      } else {
        s.r_sym = norm(s.point - ai);
      }
      entries.push_back(s);
    }
    offsets.push_back(static_cast<int>(entries.size()));
  }
  return SymStencil(std::move(offsets), std::move(entries));
}

// ---------------------------------------------------------------------------

struct AcutenessReport {
  bool is_acute = false;
  double c_ang = 0.0;
  Edge worst_pair{-1, -1};
};

/// Strict acuteness: every off-diagonal stiffness entry over shared supports
/// is <= -1e-14. C_ang is minus the largest such entry.
inline AcutenessReport check_acuteness(const Mesh& mesh, const SparseMatrix& stiffness) {
  AcutenessReport rep;
  double worst = -std::numeric_limits<double>::infinity();
  for (const Edge& e : mesh.edges()) {
    const double kij = entry(stiffness, e.first, e.second);
    if (kij > worst) {
      worst = kij;
      rep.worst_pair = e;
    }
  }
  rep.c_ang = -worst;
  rep.is_acute = worst <= -1e-14;
  return rep;
}

}  // namespace pnp

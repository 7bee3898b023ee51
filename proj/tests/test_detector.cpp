#include "oracle.hpp"
#include "pnp/detector.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pnp;

namespace {

struct Fixture {
  Mesh mesh;
  SymStencil stencil;
  explicit Fixture(int n) : mesh(build_unit_square(n)), stencil(build_sym_stencils(mesh)) {}
};

Field coords(const Mesh& mesh, double ax, double ay, double c = 0.0) {
  Field x(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) x[i] = ax * mesh.node(i).x + ay * mesh.node(i).y + c;
  return x;
}

// Jump recomputed from the exhaustive ray oracle and barycentric evaluation.
double oracle_jump(const Mesh& mesh, int i, int j, const Field& x) {
  const Point ai = mesh.node(i), aj = mesh.node(j);
  const double r = pnp::norm(aj - ai);
  const oracle::Hit hit = oracle::ray_hit(mesh, i, j);
  if (!hit.found) return (x[j] - x[i]) / r + (x[j] - x[i]) / r;
  const double rs = pnp::norm(hit.point - ai);
  return (x[j] - x[i]) / r + (oracle::evaluate(mesh, x, hit.point) - x[i]) / rs;
}

}  // namespace

TEST(Jump, ConstantFieldIsZero) {
  Fixture f(4);
  const Field x = Field::Constant(f.mesh.num_nodes(), 1.7);
  for (int i = 0; i < f.mesh.num_nodes(); ++i)
    for (int j : f.mesh.neighbors(i)) {
      if (j == i) continue;
      EXPECT_EQ(jump(i, j, x, f.stencil), 0.0);
      EXPECT_EQ(mean(i, j, x, f.stencil), 0.0);
    }
}

TEST(Jump, LinearFieldCancelsAtInteriorNodes) {
  Fixture f(5);
  const Field x = coords(f.mesh, 1.3, -0.7, 0.2);
  for (int i = 0; i < f.mesh.num_nodes(); ++i) {
    if (f.mesh.on_boundary(i)) continue;
    for (const SymEntry& s : f.stencil.at(i)) EXPECT_NEAR(jump(s, i, x), 0.0, 1e-12);
  }
}

TEST(Jump, MatchesRayOracle) {
  Fixture f(4);
  std::mt19937 rng(17);
  const Field x = oracle::random_field(f.mesh.num_nodes(), rng);
  for (int i = 0; i < f.mesh.num_nodes(); ++i)
    for (const SymEntry& s : f.stencil.at(i)) EXPECT_NEAR(jump(s, i, x), oracle_jump(f.mesh, i, s.j, x), 1e-10);
}

TEST(Jump, StrictMaximumGivesNegativeJump) {
  Fixture f(4);
  std::mt19937 rng(2);
  Field x = oracle::random_field(f.mesh.num_nodes(), rng, 0.0, 1.0);
  const int i = 12;  // interior node of the 5x5 lattice
  ASSERT_FALSE(f.mesh.on_boundary(i));
  x[i] = 2.0;
  for (const SymEntry& s : f.stencil.at(i)) {
    EXPECT_LT(jump(s, i, x), 0.0);
    EXPECT_NEAR(std::abs(jump(s, i, x)), 2.0 * mean(s, i, x), 1e-14);
  }
}

TEST(Jump, SignFlipNegatesJumpKeepsMean) {
  Fixture f(4);
  std::mt19937 rng(3);
  const Field x = oracle::random_field(f.mesh.num_nodes(), rng);
  const Field y = -x;
  for (int i = 0; i < f.mesh.num_nodes(); ++i)
    for (const SymEntry& s : f.stencil.at(i)) {
      EXPECT_DOUBLE_EQ(jump(s, i, y), -jump(s, i, x));
      EXPECT_DOUBLE_EQ(mean(s, i, y), mean(s, i, x));
    }
}

TEST(Jump, MeanBoundsHalfJump) {
  Fixture f(6);
  std::mt19937 rng(4);
  for (int t = 0; t < 50; ++t) {
    const Field x = oracle::random_field(f.mesh.num_nodes(), rng);
    for (int i = 0; i < f.mesh.num_nodes(); ++i)
      for (const SymEntry& s : f.stencil.at(i)) EXPECT_GE(mean(s, i, x) + 1e-15, 0.5 * std::abs(jump(s, i, x)));
  }
}

TEST(Alpha, StrictExtremaGiveOne) {
  Fixture f(6);
  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    Field x = oracle::random_field(f.mesh.num_nodes(), rng, 0.0, 1.0);
    for (int i = 0; i < f.mesh.num_nodes(); ++i) {
      bool is_max = true, is_min = true;
      for (int j : f.mesh.neighbors(i)) {
        if (j == i) continue;
        is_max = is_max && x[i] > x[j];
        is_min = is_min && x[i] < x[j];
      }
      const AlphaVector a = compute_alpha(x, 2.0, f.stencil);
      if ((is_max || is_min) && !f.mesh.on_boundary(i)) {
        EXPECT_DOUBLE_EQ(a[i], 1.0) << "node " << i;
      }
    }
  }
}

TEST(Alpha, ConstantIsZero) {
  Fixture f(3);
  const AlphaVector a = compute_alpha(Field::Constant(f.mesh.num_nodes(), 4.0), 2.0, f.stencil);
  for (int i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], 0.0);
}

TEST(Alpha, CoordinateFieldVanishesInside) {
  Fixture f(6);
  const AlphaVector a = compute_alpha(coords(f.mesh, 1.0, 0.0), 2.0, f.stencil);
  for (int i = 0; i < a.size(); ++i)
    if (!f.mesh.on_boundary(i)) {
      EXPECT_NEAR(a[i], 0.0, 1e-20);
    }
}

TEST(Alpha, RangeOnRandomFields) {
  Fixture f(8);
  std::mt19937 rng(6);
  for (int t = 0; t < 200; ++t) {
    const Field x = oracle::random_field(f.mesh.num_nodes(), rng, -5.0, 5.0);
    for (double q : {0.5, 1.0, 2.0, 3.0}) {
      const AlphaVector a = compute_alpha(x, q, f.stencil);
      for (int i = 0; i < a.size(); ++i) {
        EXPECT_GE(a[i], 0.0);
        EXPECT_LE(a[i], 1.0);
      }
    }
  }
}

TEST(Alpha, AffineInvariance) {
  Fixture f(6);
  std::mt19937 rng(7);
  const Field x = oracle::random_field(f.mesh.num_nodes(), rng);
  const AlphaVector a = compute_alpha(x, 2.0, f.stencil);
  const AlphaVector b = compute_alpha((3.0 * x.array() + 11.0).matrix(), 2.0, f.stencil);
  const AlphaVector c = compute_alpha((-0.25 * x).eval(), 2.0, f.stencil);
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], 1e-12);
    EXPECT_NEAR(a[i], c[i], 1e-12);
  }
}

TEST(Alpha, ExponentOrdersValues) {
  Fixture f(6);
  std::mt19937 rng(8);
  const Field x = oracle::random_field(f.mesh.num_nodes(), rng);
  const AlphaVector a1 = compute_alpha(x, 1.0, f.stencil), a2 = compute_alpha(x, 2.0, f.stencil);
  for (int i = 0; i < a1.size(); ++i) EXPECT_NEAR(a2[i], a1[i] * a1[i], 1e-15);
}

TEST(Alpha, OneSidedBoundaryExtremum) {
  Fixture f(4);
  Field x = Field::Zero(f.mesh.num_nodes());
  x[0] = 1.0;  // corner maximum
  EXPECT_DOUBLE_EQ(compute_alpha(x, 2.0, f.stencil)[0], 1.0);
}

TEST(Alpha, RejectsNonPositiveExponent) {
  Fixture f(2);
  const Field x = Field::Zero(f.mesh.num_nodes());
  EXPECT_THROW(compute_alpha(x, 0.0, f.stencil), std::invalid_argument);
  EXPECT_THROW(compute_alpha(x, -1.0, f.stencil), std::invalid_argument);
  EXPECT_THROW(compute_alpha(Field::Zero(3), 2.0, f.stencil), std::invalid_argument);
}

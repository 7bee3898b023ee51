#include "oracle.hpp"
#include "pnp/scenario.hpp"
#include "pnp/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <random>

using namespace pnp;

namespace {

SolverConfig config(Algorithm alg, double k = 1e-3, double T = 0.0) {
  SolverConfig c;
  c.algorithm = alg;
  c.k = k;
  c.T = T;
  return c;
}

State initial_state(const PicardStepper& st, const Field& p, const Field& n) {
  State s;
  s.p = p;
  s.n = n;
  s.phi = st.potential(p, n);
  return s;
}

std::pair<Field, Field> smooth_data(const Mesh& mesh) {
  InitialSpec in;
  in.kind = InitialSpec::Kind::smooth;
  return initial_fields(in, mesh);
}

BoundarySpec channel_bc(double v) {
  BoundarySpec bc;
  bc.phi_dirichlet = {{BoundaryTag::bottom, -v}, {BoundaryTag::top, v}};
  return bc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Poisson

TEST(Poisson, EqualDensitiesGiveZeroPotential) {
  const Mesh mesh = build_unit_square(6);
  const Assembly a = Assembly::build(mesh);
  std::mt19937 rng(1);
  const Field p = oracle::random_field(mesh.num_nodes(), rng, 0.0, 2.0);
  const Field phi = solve_poisson(p, p, mesh, a, BoundarySpec{});
  EXPECT_LE(phi.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Poisson, NeumannSolutionHasZeroMeanAndSatisfiesEquation) {
  const Mesh mesh = build_unit_square(8);
  const Assembly a = Assembly::build(mesh);
  const auto [p, n] = smooth_data(mesh);
  const Field phi = solve_poisson(p, n, mesh, a, BoundarySpec{});
  EXPECT_NEAR(a.lumped_diag.dot(phi), 0.0, 1e-13);
  Field rhs = a.lumped_diag.cwiseProduct(p - n);
  rhs -= (rhs.sum() / a.lumped_diag.sum()) * a.lumped_diag;
  EXPECT_LE((a.stiffness * phi - rhs).lpNorm<Eigen::Infinity>(), 1e-11);
}

TEST(Poisson, NeumannShiftInvariance) {
  const Mesh mesh = build_unit_square(6);
  const Assembly a = Assembly::build(mesh);
  std::mt19937 rng(2);
  const Field p = oracle::random_field(mesh.num_nodes(), rng, 1.0, 2.0);
  const Field n = p + 1e-3 * oracle::random_field(mesh.num_nodes(), rng);
  const Field shift = Field::Constant(mesh.num_nodes(), 3.0);
  const Field phi1 = solve_poisson(p, n, mesh, a, BoundarySpec{});
  const Field phi2 = solve_poisson(p + shift, n + shift, mesh, a, BoundarySpec{});
  EXPECT_LE((phi1 - phi2).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Poisson, RejectsChargedNeumannProblem) {
  const Mesh mesh = build_unit_square(4);
  const Assembly a = Assembly::build(mesh);
  const Field p = Field::Constant(mesh.num_nodes(), 1.1), n = Field::Ones(mesh.num_nodes());
  EXPECT_THROW(solve_poisson(p, n, mesh, a, BoundarySpec{}), ElectroneutralityError);
  const Field nearly = Field::Constant(mesh.num_nodes(), 1.005);
  EXPECT_NO_THROW(solve_poisson(nearly, n, mesh, a, BoundarySpec{}));
}

TEST(Poisson, ChannelHarmonicExtensionMatchesDenseSolve) {
  const Mesh mesh = build_channel(0.25);
  const Assembly a = Assembly::build(mesh);
  const BoundarySpec bc = channel_bc(50.0);
  const Field one = Field::Ones(mesh.num_nodes());
  const Field phi = solve_poisson(one, one, mesh, a, bc);

  const auto dense = oracle::brute_force(mesh, Field::Zero(mesh.num_nodes()));
  std::vector<int> free;
  Field g = Field::Zero(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Point x = mesh.node(i);
    if (std::abs(x.y) < 1e-12) g[i] = -50.0;
    else if (std::abs(x.y - 7.0) < 1e-12) g[i] = 50.0;
    else free.push_back(i);
  }
  const int m = static_cast<int>(free.size());
  Eigen::MatrixXd kk(m, m);
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    b[r] = 0.0;
    for (int c = 0; c < mesh.num_nodes(); ++c) b[r] -= dense.stiffness[free[r]][c] * g[c];
    for (int c = 0; c < m; ++c) kk(r, c) = dense.stiffness[free[r]][free[c]];
  }
  const Eigen::VectorXd u = kk.partialPivLu().solve(b);
  for (int r = 0; r < m; ++r) EXPECT_NEAR(phi[free[r]], u[r], 1e-9);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (g[i] != 0.0) {
      EXPECT_EQ(phi[i], g[i]);
    }
  // Discrete maximum principle for the harmonic extension on this mesh.
  EXPECT_LE(phi.maxCoeff(), 50.0 + 1e-10);
  EXPECT_GE(phi.minCoeff(), -50.0 - 1e-10);
}

// ---------------------------------------------------------------------------
// Line search

TEST(LineSearch, AcceptsFullStepWhenResidualDrops) {
  Eigen::VectorXd prev(1), cand(1);
  prev << 1.0;
  cand << 0.0;
  const auto ls = backtracking_search(prev, cand, [](const Eigen::VectorXd& v) { return std::abs(v[0]); }, 0.5, 30);
  EXPECT_EQ(ls.theta, 1.0);
  EXPECT_FALSE(ls.no_decrease);
  EXPECT_EQ(ls.iterate[0], 0.0);
}

TEST(LineSearch, ShrinksOnQuadraticResidual) {
  Eigen::VectorXd prev(1), cand(1);
  prev << 0.0;
  cand << 1.0;
  // r(theta) = (theta - 0.1)^2 + 0.5 - 0.01: minimum near 0, r(1) > r(0).
  auto r = [](const Eigen::VectorXd& v) { return (v[0] - 0.1) * (v[0] - 0.1) + 0.49; };
  const auto ls = backtracking_search(prev, cand, r, 0.5, 30);
  EXPECT_LT(ls.theta, 1.0);
  EXPECT_FALSE(ls.no_decrease);
  EXPECT_LT(ls.residual, r(prev));
  EXPECT_DOUBLE_EQ(ls.theta, 0.125);
}

TEST(LineSearch, FlagsNoDecreaseForIdenticalCandidate) {
  Eigen::VectorXd prev(2);
  prev << 1.0, -2.0;
  int calls = 0;
  auto r = [&](const Eigen::VectorXd& v) {
    ++calls;
    return v.norm();
  };
  const auto ls = backtracking_search(prev, prev, r, 0.5, 4);
  EXPECT_TRUE(ls.no_decrease);
  EXPECT_EQ(ls.iterate, prev);
  EXPECT_DOUBLE_EQ(ls.theta, 0.0625);
  EXPECT_EQ(calls, 6);
}

// ---------------------------------------------------------------------------
// Picard steps

TEST(PicardStep, UniformStateIsFixedPoint) {
  const Mesh mesh = build_unit_square(8);
  const Field one = Field::Ones(mesh.num_nodes());
  for (Algorithm alg : {Algorithm::alg1, Algorithm::alg2}) {
    const PicardStepper st(mesh, BoundarySpec{}, config(alg), 0.5);
    const State s0 = initial_state(st, one, one);
    const StepResult r = st.step(s0);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LE((r.state.p - one).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE((r.state.n - one).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE(r.state.phi.lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_DOUBLE_EQ(r.state.t, 1e-3);
  }
}

TEST(PicardStep, SmoothFirstStepConverges) {
  const Mesh mesh = build_unit_square(20);
  const auto [p0, n0] = smooth_data(mesh);
  for (Algorithm alg : {Algorithm::alg1, Algorithm::alg2}) {
    const PicardStepper st(mesh, BoundarySpec{}, config(alg), default_epsilon(p0, n0));
    const State s0 = initial_state(st, p0, n0);
    const StepResult r = st.step(s0);
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_NEAR(st.residual(s0, r.state), r.residual, 1e-12);
    EXPECT_EQ(r.residual_history.size(), static_cast<std::size_t>(r.iterations) + 1);
    const Field& d = st.assembly().lumped_diag;
    EXPECT_NEAR(mass(r.state.p, d), mass(p0, d), 1e-11);
    EXPECT_NEAR(mass(r.state.n, d), mass(n0, d), 1e-11);
    // The potential is consistent with the new densities.
    EXPECT_LE((st.potential(r.state.p, r.state.n) - r.state.phi).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(PicardStep, SecondSchemeDecreasesEntropyOnAcuteMesh) {
  const Mesh mesh = build_acute_rectangle(20, 22, 1.0);
  const auto [p0, n0] = smooth_data(mesh);
  const PicardStepper st(mesh, BoundarySpec{}, config(Algorithm::alg2), default_epsilon(p0, n0));
  const State s0 = initial_state(st, p0, n0);
  const StepResult r = st.step(s0);
  const Assembly& a = st.assembly();
  const double e0 = entropy_Eh(s0.p, s0.n, s0.phi, a.lumped_diag, a.stiffness);
  const double e1 = entropy_Eh(r.state.p, r.state.n, r.state.phi, a.lumped_diag, a.stiffness);
  EXPECT_LE(e1, e0 + 1e-8);
  const double lo = std::min(p0.minCoeff(), n0.minCoeff()), hi = std::max(p0.maxCoeff(), n0.maxCoeff());
  EXPECT_GE(std::min(r.state.p.minCoeff(), r.state.n.minCoeff()), lo - 1e-10);
  EXPECT_LE(std::max(r.state.p.maxCoeff(), r.state.n.maxCoeff()), hi + 1e-10);
}

TEST(PicardStep, LaggedAndSplitTransportAgree) {
  const Mesh mesh = build_unit_square(12);
  const auto [p0, n0] = smooth_data(mesh);
  SolverConfig lagged = config(Algorithm::alg2), split = config(Algorithm::alg2);
  lagged.star = StarLinearization::lagged;
  lagged.picard_residual_tol = split.picard_residual_tol = 1e-11;
  const double eps = default_epsilon(p0, n0);
  const PicardStepper a(mesh, BoundarySpec{}, lagged, eps), b(mesh, BoundarySpec{}, split, eps);
  const State s0 = initial_state(a, p0, n0);
  const StepResult ra = a.step(s0), rb = b.step(s0);
  EXPECT_LE((ra.state.p - rb.state.p).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LE((ra.state.n - rb.state.n).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(PicardStep, IterationCapRaisesStepError) {
  const Mesh mesh = build_unit_square(10);
  const auto [p0, n0] = smooth_data(mesh);
  SolverConfig c = config(Algorithm::alg1, 1e-2);
  c.picard_max_iters = 1;
  c.picard_residual_tol = 1e-15;
  c.picard_increment_tol = 1e-300;
  const PicardStepper st(mesh, BoundarySpec{}, c, default_epsilon(p0, n0));
  try {
    st.step(initial_state(st, p0, n0));
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

// ---------------------------------------------------------------------------
// Runs

TEST(Run, ShortHorizonGivesInitialReportOnly) {
  const Mesh mesh = build_unit_square(4);
  const auto [p0, n0] = smooth_data(mesh);
  const RunResult r = run(mesh, BoundarySpec{}, config(Algorithm::alg1, 1e-3, 5e-4), p0, n0);
  EXPECT_EQ(r.steps, 0);
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].t, 0.0);
  EXPECT_TRUE(r.completed());
}

TEST(Run, SmoothFirstSchemeFullHorizon) {
  const Scenario sc = builtin_scenario("smooth", Algorithm::alg1);
  ASSERT_EQ(sc.solver.k, 1e-3);
  ASSERT_EQ(sc.solver.T, 0.5);
  const Mesh mesh = sc.mesh.build();
  const auto [p0, n0] = initial_fields(sc.initial, mesh);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run(mesh, sc.bc, sc.solver, p0, n0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("smooth, first scheme, n = 40, 500 steps: %.1f s\n", secs);
  ASSERT_TRUE(r.completed()) << *r.error;
  EXPECT_EQ(r.steps, 500);
  EXPECT_EQ(r.reports.size(), 501u);
  EXPECT_NEAR(r.reports.back().t, 0.5, 1e-12);
  for (const StepReport& row : r.reports) {
    EXPECT_TRUE(row.flags.dmp_ok) << row.t;
    EXPECT_TRUE(row.flags.mass_ok) << row.t;
  }
}

TEST(Run, ChannelMassesStayConstant) {
  Scenario sc = builtin_scenario("channel_uniform", Algorithm::alg1);
  sc.mesh.cell = 0.25;
  sc.solver.T = 0.05;
  const Mesh mesh = sc.mesh.build();
  const auto [p0, n0] = initial_fields(sc.initial, mesh);
  const RunResult r = run(mesh, sc.bc, sc.solver, p0, n0);
  ASSERT_TRUE(r.completed()) << *r.error;
  EXPECT_TRUE(r.scope.mass);
  EXPECT_FALSE(r.scope.dmp);
  for (const StepReport& row : r.reports) {
    EXPECT_NEAR(row.mass_p, r.reports[0].mass_p, 1e-10 * r.reports[0].mass_p);
    EXPECT_NEAR(row.mass_n, r.reports[0].mass_n, 1e-10 * r.reports[0].mass_n);
  }
}

TEST(Run, WarnsWhenSmallnessFails) {
  const Mesh mesh = build_unit_square(4);
  const auto [p0, n0] = smooth_data(mesh);
  const double range = std::max(p0.maxCoeff(), n0.maxCoeff()) - std::min(p0.minCoeff(), n0.minCoeff());
  ASSERT_GT(range, 0.0);
  const RunResult r = run(mesh, BoundarySpec{}, config(Algorithm::alg1, 1.5 / range, 0.0), p0, n0);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_FALSE(r.reports[0].flags.smallness_ok);
  const RunResult ok = run(mesh, BoundarySpec{}, config(Algorithm::alg1, 1e-3, 0.0), p0, n0);
  EXPECT_TRUE(ok.warnings.empty());
}

TEST(Run, InvariantScope) {
  const Mesh square = build_unit_square(4), acute = build_acute_rectangle(6, 6, 1.0);
  const SparseMatrix ks = assemble_stiffness(square), ka = assemble_stiffness(acute);
  InvariantScope s = invariant_scope(config(Algorithm::alg2), BoundarySpec{}, square, ks);
  EXPECT_TRUE(s.dmp && s.mass);
  EXPECT_FALSE(s.entropy);
  s = invariant_scope(config(Algorithm::alg2), BoundarySpec{}, acute, ka);
  EXPECT_TRUE(s.entropy);
  s = invariant_scope(config(Algorithm::alg1), BoundarySpec{}, acute, ka);
  EXPECT_FALSE(s.entropy);
  BoundarySpec membrane = channel_bc(1.0);
  membrane.p_dirichlet = {{BoundaryTag::membrane, 1.0}};
  const Mesh channel = build_channel(0.5);
  s = invariant_scope(config(Algorithm::alg2), membrane, channel, assemble_stiffness(channel));
  EXPECT_FALSE(s.dmp || s.mass || s.entropy);
}

TEST(Config, ValidationErrors) {
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  };
  bad([](SolverConfig& c) { c.k = 0.0; });
  bad([](SolverConfig& c) { c.k = -1e-3; });
  bad([](SolverConfig& c) { c.T = -1.0; });
  bad([](SolverConfig& c) { c.q = 0.0; });
  bad([](SolverConfig& c) { c.picard_max_iters = 0; });
  bad([](SolverConfig& c) { c.shrink = 1.0; });
  bad([](SolverConfig& c) { c.max_halvings = -1; });
  bad([](SolverConfig& c) { c.nonmonotone_window = 0; });
  bad([](SolverConfig& c) { c.epsilon = 0.0; });
  EXPECT_NO_THROW(SolverConfig{}.validate());
}

TEST(Config, BoundaryTagsMustExist) {
  const Mesh square = build_unit_square(4);
  BoundarySpec bc;
  bc.phi_dirichlet = {{BoundaryTag::membrane, 1.0}};
  EXPECT_THROW(bc.validate(square), std::invalid_argument);
  const Field one = Field::Ones(square.num_nodes());
  EXPECT_THROW(run(square, bc, config(Algorithm::alg1), one, one), std::invalid_argument);
}

TEST(Epsilon, DefaultsToHalfMinimum) {
  EXPECT_DOUBLE_EQ(default_epsilon(Field::Constant(3, 0.4), Field::Constant(3, 2.0)), 0.2);
  EXPECT_DOUBLE_EQ(default_epsilon(Field::Zero(3), Field::Ones(3)), 1e-8);
}

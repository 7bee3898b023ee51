#pragma once

// Time marching of the two stabilised PNP schemes: Picard linearisation with
// a backtracking line search, and the (Neumann or Dirichlet) Poisson solve.

#include "pnp/core.hpp"
#include "pnp/detector.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/entropy.hpp"
#include "pnp/fespace.hpp"
#include "pnp/mesh.hpp"
#include "pnp/stabilizer.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pnp {

enum class Algorithm { alg1, alg2 };

/// How the second scheme's transport term enters each Picard sweep: as a
/// load from the previous iterate, or with the edge means of the density
/// taken implicitly (see star_split). Both have the same fixed points.
enum class StarLinearization { lagged, split };

struct State {
  Field p;
  Field n;
  Field phi;
  double t = 0.0;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::alg1;
  double k = 1e-3;
  double T = 0.5;
  double q = 2.0;
  StarLinearization star = StarLinearization::split;
  double picard_residual_tol = 1e-6;   // max-norm
  double picard_increment_tol = 1e-16;  // L2-norm
  int picard_max_iters = 100;
  double linear_tol = 1e-12;
  double shrink = 0.5;
  int max_halvings = 30;
  // When backtracking finds no decrease, a full step is still taken if it
  // beats the largest of this many recent residuals.
  int nonmonotone_window = 5;
  // Regularisation of g'; defaults to half the smallest initial density.
  std::optional<double> epsilon;
  // Admissible |(p - n, 1)_h| / |Omega| for the pure-Neumann Poisson solve.
  double neutrality_tol = 1e-2;

  void validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("time step k must be positive");
    if (!(T >= 0.0)) throw std::invalid_argument("final time T must be nonnegative");
    if (!(q > 0.0)) throw std::invalid_argument("detector exponent q must be positive");
    if (!(picard_residual_tol > 0.0) || !(picard_increment_tol > 0.0) || !(linear_tol > 0.0))
      throw std::invalid_argument("tolerances must be positive");
    if (picard_max_iters < 1) throw std::invalid_argument("picard_max_iters must be >= 1");
    if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
    if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
    if (nonmonotone_window < 1) throw std::invalid_argument("nonmonotone_window must be >= 1");
    if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  }
};

/// Strongly imposed Dirichlet data per boundary tag; every other boundary
/// is natural (homogeneous Neumann).
struct BoundarySpec {
  std::map<BoundaryTag, double> phi_dirichlet;
  std::map<BoundaryTag, double> p_dirichlet;
  std::map<BoundaryTag, double> n_dirichlet;

  bool pure_neumann_phi() const { return phi_dirichlet.empty(); }
  bool density_dirichlet() const { return !p_dirichlet.empty() || !n_dirichlet.empty(); }

  void validate(const Mesh& mesh) const {
    for (const auto* m : {&phi_dirichlet, &p_dirichlet, &n_dirichlet})
      for (const auto& [tag, v] : *m) {
        if (tag == BoundaryTag::interior || !mesh.has_tag(tag))
          throw std::invalid_argument(std::string("boundary tag '") + to_string(tag) +
                                      "' does not exist on the mesh");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite Dirichlet value");
      }
  }
};

/// Node -> prescribed value, with each node taking the value of its tag.
inline std::vector<std::pair<int, double>> dirichlet_nodes(const Mesh& mesh,
                                                           const std::map<BoundaryTag, double>& bc) {
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    auto it = bc.find(mesh.tag(i));
    if (it != bc.end()) out.emplace_back(i, it->second);
  }
  return out;
}

inline void check_linear_residual(const SparseMatrix& a, const Field& x, const Field& b, double tol,
                                  const char* what) {
  const double bn = b.norm();
  const double rn = (a * x - b).norm();
  if (!std::isfinite(rn) || (rn > tol * bn && rn > 1e-300))
    throw SolverError(std::string(what) + ": linear solve did not reach tolerance (residual " +
                          std::to_string(rn) + ")",
                      rn);
}

// ---------------------------------------------------------------------------
// Poisson

/// Solves K phi = D (p - n) with the potential's boundary data. Without
/// Dirichlet data the right side must be nearly compatible; its mean is
/// removed and the solution shifted to zero mean.
class PoissonSolver {
 public:
  PoissonSolver(const Mesh& mesh, const Assembly& assembly, const BoundarySpec& bc,
                double linear_tol = 1e-12, double neutrality_tol = 1e-2)
      : stiffness_(assembly.stiffness),
        lumped_(assembly.lumped_diag),
        area_(assembly.lumped_diag.sum()),
        linear_tol_(linear_tol),
        neutrality_tol_(neutrality_tol) {
    const int n = mesh.num_nodes();
    fixed_.assign(n, false);
    values_ = Field::Zero(n);
    if (bc.pure_neumann_phi()) {
      fixed_[0] = true;  // pinned, then shifted to zero mean
      neumann_ = true;
    } else {
      for (auto [i, v] : dirichlet_nodes(mesh, bc.phi_dirichlet)) {
        fixed_[i] = true;
        values_[i] = v;
      }
    }
    free_index_.assign(n, -1);
    for (int i = 0; i < n; ++i)
      if (!fixed_[i]) free_index_[i] = num_free_++;

    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
      if (fixed_[i]) continue;
      for (SparseMatrix::InnerIterator it(stiffness_, i); it; ++it)
        if (!fixed_[it.col()]) t.emplace_back(free_index_[i], free_index_[it.col()], it.value());
    }
    reduced_.resize(num_free_, num_free_);
    reduced_.setFromTriplets(t.begin(), t.end());
    ldlt_.compute(reduced_);
    if (ldlt_.info() != Eigen::Success) throw SolverError("Poisson factorisation failed", 0.0);
  }

  bool pure_neumann() const { return neumann_; }

  Field solve(const Field& p, const Field& n) const {
    Field rhs = lumped_.cwiseProduct(p - n);
    if (neumann_) {
      const double total = rhs.sum();
      if (std::abs(total) > neutrality_tol_ * area_)
        throw ElectroneutralityError("Poisson solve: (p - n, 1)_h = " + std::to_string(total) +
                                     " violates electroneutrality");
      rhs -= (total / area_) * lumped_;
    }
    Field b(num_free_);
    for (int i = 0; i < static_cast<int>(fixed_.size()); ++i) {
      if (fixed_[i]) continue;
      double v = rhs[i];
      for (SparseMatrix::InnerIterator it(stiffness_, i); it; ++it)
        if (fixed_[it.col()]) v -= it.value() * values_[it.col()];
      b[free_index_[i]] = v;
    }
    const Field xf = ldlt_.solve(b);
    const double rn = (reduced_ * xf - b).norm();
    if (!std::isfinite(rn) || rn > linear_tol_ * std::max(b.norm(), 1.0))
      throw SolverError("Poisson solve did not reach tolerance (residual " + std::to_string(rn) + ")", rn);
    Field phi = values_;
    for (int i = 0; i < static_cast<int>(fixed_.size()); ++i)
      if (!fixed_[i]) phi[i] = xf[free_index_[i]];
    if (neumann_) phi.array() -= lumped_.dot(phi) / area_;
    return phi;
  }

 private:
  SparseMatrix stiffness_;
  Field lumped_;
  double area_;
  double linear_tol_;
  double neutrality_tol_;
  bool neumann_ = false;
  std::vector<bool> fixed_;
  std::vector<int> free_index_;
  int num_free_ = 0;
  Field values_;
  Eigen::SparseMatrix<double> reduced_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Convenience wrapper matching the module contract.
inline Field solve_poisson(const Field& p, const Field& n, const Mesh& mesh, const Assembly& assembly,
                           const BoundarySpec& bc) {
  return PoissonSolver(mesh, assembly, bc).solve(p, n);
}

// ---------------------------------------------------------------------------
// Line search

struct LineSearchResult {
  Eigen::VectorXd iterate;
  double theta = 1.0;
  double residual = 0.0;
  bool no_decrease = false;
};

/// Largest theta in {1, shrink, shrink^2, ...} for which
/// prev + theta (candidate - prev) strictly lowers the residual.
inline LineSearchResult backtracking_search(const Eigen::VectorXd& prev, const Eigen::VectorXd& candidate,
                                            const std::function<double(const Eigen::VectorXd&)>& residual_fn,
                                            double shrink, int max_halvings,
                                            std::optional<double> prev_residual = std::nullopt) {
  const double r0 = prev_residual ? *prev_residual : residual_fn(prev);
  const Eigen::VectorXd dir = candidate - prev;
  double theta = 1.0;
  LineSearchResult out;
  for (int h = 0; h <= max_halvings; ++h) {
    out.iterate = prev + theta * dir;
    out.theta = theta;
    out.residual = residual_fn(out.iterate);
    if (out.residual < r0) return out;
    if (h < max_halvings) theta *= shrink;
  }
  out.no_decrease = true;
  return out;
}

// ---------------------------------------------------------------------------
// Picard stepping

struct StepResult {
  State state;
  int iterations = 0;
  std::vector<double> residual_history;
  double residual = 0.0;
  bool line_search_stalled = false;
};

/// Advances (p, n, phi) by one time step of either scheme.
class PicardStepper {
 public:
  PicardStepper(const Mesh& mesh, const BoundarySpec& bc, const SolverConfig& config, double epsilon)
      : mesh_(mesh),
        bc_(bc),
        config_(config),
        assembly_(Assembly::build(mesh)),
        stencil_(build_sym_stencils(mesh)),
        fns_(epsilon),
        poisson_(mesh, assembly_, bc, config.linear_tol, config.neutrality_tol),
        k_edges_(edge_entries(mesh, assembly_.stiffness)),
        p_fixed_(dirichlet_nodes(mesh, bc.p_dirichlet)),
        n_fixed_(dirichlet_nodes(mesh, bc.n_dirichlet)) {
    config_.validate();
    bc_.validate(mesh);
  }

  const Mesh& mesh() const { return mesh_; }
  const Assembly& assembly() const { return assembly_; }
  const SymStencil& stencil() const { return stencil_; }
  const EntropyFns& entropy_fns() const { return fns_; }
  const SolverConfig& config() const { return config_; }
  const PoissonSolver& poisson() const { return poisson_; }

  /// Potential consistent with the densities and the boundary data.
  Field potential(const Field& p, const Field& n) const { return poisson_.solve(p, n); }

  /// Imposes density Dirichlet values on a state.
  void impose_density_bc(State& s) const {
    for (auto [i, v] : p_fixed_) s.p[i] = v;
    for (auto [i, v] : n_fixed_) s.n[i] = v;
  }

  /// Max-norm of the nonlinear residual of both ion equations at `cur`,
  /// with every coefficient evaluated at `cur` itself.
  double residual(const State& old, const State& cur) const {
    const auto [rp, rn] = residual_vectors(old, cur);
    return std::max(rp.lpNorm<Eigen::Infinity>(), rn.lpNorm<Eigen::Infinity>());
  }

  std::pair<Field, Field> residual_vectors(const State& old, const State& cur) const {
    const double k = config_.k;
    Field rp, rn;
    if (config_.algorithm == Algorithm::alg1) {
      const SparseMatrix g = assemble_drift(mesh_, cur.phi);
      const SparseMatrix base = (1.0 / k) * assembly_.mass + assembly_.stiffness;
      const auto bp = build_B1(Sign::plus, compute_alpha(cur.p, config_.q, stencil_), k, mesh_,
                               assembly_.mass, assembly_.stiffness, g);
      const auto bn = build_B1(Sign::minus, compute_alpha(cur.n, config_.q, stencil_), k, mesh_,
                               assembly_.mass, assembly_.stiffness, g);
      rp = (base + g + bp.matrix) * cur.p - (1.0 / k) * (assembly_.mass * old.p);
      rn = (base - g + bn.matrix) * cur.n - (1.0 / k) * (assembly_.mass * old.n);
    } else {
      const Field& d = assembly_.lumped_diag;
      const Field neg_phi = -cur.phi;
      const auto bp = build_B2(Sign::plus, cur.p, cur.phi, compute_alpha(cur.p, config_.q, stencil_),
                               fns_, mesh_, k_edges_);
      const auto bn = build_B2(Sign::minus, cur.n, cur.phi, compute_alpha(cur.n, config_.q, stencil_),
                               fns_, mesh_, k_edges_);
      rp = d.cwiseProduct(cur.p - old.p) / k + assembly_.stiffness * cur.p +
           star_load(cur.p, cur.phi, fns_, mesh_, k_edges_) + bp.matrix * cur.p;
      rn = d.cwiseProduct(cur.n - old.n) / k + assembly_.stiffness * cur.n +
           star_load(cur.n, neg_phi, fns_, mesh_, k_edges_) + bn.matrix * cur.n;
    }
    for (auto [i, v] : p_fixed_) rp[i] = cur.p[i] - v;
    for (auto [i, v] : n_fixed_) rn[i] = cur.n[i] - v;
    return {rp, rn};
  }

  /// One Picard sweep: ion equations with coefficients frozen at `cur`, then
  /// the Poisson equation with the new densities.
  State sweep(const State& old, const State& cur) const {
    const double k = config_.k;
    SparseMatrix ap, an;
    Field bp, bn;
    if (config_.algorithm == Algorithm::alg1) {
      const SparseMatrix g = assemble_drift(mesh_, cur.phi);
      const SparseMatrix base = (1.0 / k) * assembly_.mass + assembly_.stiffness;
      const auto sp = build_B1(Sign::plus, compute_alpha(cur.p, config_.q, stencil_), k, mesh_,
                               assembly_.mass, assembly_.stiffness, g);
      const auto sn = build_B1(Sign::minus, compute_alpha(cur.n, config_.q, stencil_), k, mesh_,
                               assembly_.mass, assembly_.stiffness, g);
      ap = base + g + sp.matrix;
      an = base - g + sn.matrix;
      bp = (1.0 / k) * (assembly_.mass * old.p);
      bn = (1.0 / k) * (assembly_.mass * old.n);
    } else {
      const Field& d = assembly_.lumped_diag;
      const Field neg_phi = -cur.phi;
      SparseMatrix base = assembly_.lumped * (1.0 / k) + assembly_.stiffness;
      const auto sp = build_B2(Sign::plus, cur.p, cur.phi, compute_alpha(cur.p, config_.q, stencil_),
                               fns_, mesh_, k_edges_);
      const auto sn = build_B2(Sign::minus, cur.n, cur.phi, compute_alpha(cur.n, config_.q, stencil_),
                               fns_, mesh_, k_edges_);
      ap = base + sp.matrix;
      an = base + sn.matrix;
      bp = d.cwiseProduct(old.p) / k;
      bn = d.cwiseProduct(old.n) / k;
      if (config_.star == StarLinearization::lagged) {
        bp -= star_load(cur.p, cur.phi, fns_, mesh_, k_edges_);
        bn -= star_load(cur.n, neg_phi, fns_, mesh_, k_edges_);
      } else {
        const StarSplit tp = star_split(cur.p, cur.phi, fns_, mesh_, k_edges_);
        const StarSplit tn = star_split(cur.n, neg_phi, fns_, mesh_, k_edges_);
        ap += tp.matrix;
        an += tn.matrix;
        bp -= tp.load;
        bn -= tn.load;
      }
    }
    State next;
    next.t = cur.t;
    next.p = solve_ion(ap, bp, p_fixed_, "cation equation");
    next.n = solve_ion(an, bn, n_fixed_, "anion equation");
    next.phi = poisson_.solve(next.p, next.n);
    return next;
  }

  /// Advances `old` (time t_m) to t_{m+1}.
  StepResult step(const State& old) const {
    const int nn = mesh_.num_nodes();
    auto pack = [nn](const State& s) {
      Eigen::VectorXd v(3 * nn);
      v << s.p, s.n, s.phi;
      return v;
    };
    const double t_next = old.t + config_.k;
    auto unpack = [nn, t_next](const Eigen::VectorXd& v) {
      State s;
      s.p = v.segment(0, nn);
      s.n = v.segment(nn, nn);
      s.phi = v.segment(2 * nn, nn);
      s.t = t_next;
      return s;
    };
    auto residual_fn = [&](const Eigen::VectorXd& v) { return residual(old, unpack(v)); };

    StepResult out;
    State cur = old;
    cur.t = t_next;
    impose_density_bc(cur);
    if (!p_fixed_.empty() || !n_fixed_.empty()) cur.phi = poisson_.solve(cur.p, cur.n);
    double r = residual(old, cur);
    out.residual_history.push_back(r);
    for (int it = 1; it <= config_.picard_max_iters; ++it) {
      const State cand = sweep(old, cur);
      const Eigen::VectorXd prev_v = pack(cur), cand_v = pack(cand);
      Eigen::VectorXd next_v;
      double r_next = residual(old, cand);
      bool stalled = false;
      if (r_next <= config_.picard_residual_tol || r_next < r) {
        next_v = cand_v;
      } else {
        auto ls = backtracking_search(prev_v, cand_v, residual_fn, config_.shrink,
                                      config_.max_halvings, r);
        if (!ls.no_decrease) {
          next_v = std::move(ls.iterate);
          r_next = ls.residual;
        } else if (r_next < recent_max(out.residual_history)) {
          next_v = cand_v;  // nonmonotone escape: full step against the recent window
        } else {
          next_v = std::move(ls.iterate);
          r_next = ls.residual;
          stalled = true;
        }
      }
      const double increment =
          (next_v.head(2 * nn) - prev_v.head(2 * nn)).norm();
      cur = unpack(next_v);
      r = r_next;
      out.residual_history.push_back(r);
      out.iterations = it;
      if (r <= config_.picard_residual_tol || increment <= config_.picard_increment_tol) {
        out.state = cur;
        out.residual = r;
        return out;
      }
      if (stalled) {
        out.line_search_stalled = true;
        throw StepError("Picard line search exhausted " + std::to_string(config_.max_halvings) +
                            " halvings at t = " + std::to_string(t_next) + " (residual " +
                            std::to_string(r) + ")",
                        r);
      }
    }
    throw StepError("Picard iteration did not converge in " + std::to_string(config_.picard_max_iters) +
                        " iterations at t = " + std::to_string(t_next) + " (residual " +
                        std::to_string(r) + ")",
                    r);
  }

 private:
  double recent_max(const std::vector<double>& hist) const {
    const std::size_t w = std::min<std::size_t>(hist.size(), static_cast<std::size_t>(config_.nonmonotone_window));
    return *std::max_element(hist.end() - static_cast<std::ptrdiff_t>(w), hist.end());
  }

  Field solve_ion(SparseMatrix a, Field b, const std::vector<std::pair<int, double>>& fixed,
                  const char* what) const {
    for (auto [i, v] : fixed) {
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) it.valueRef() = it.col() == i ? 1.0 : 0.0;
      b[i] = v;
    }
    Eigen::SparseMatrix<double> ac = a;
    ac.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(ac);
    if (lu.info() != Eigen::Success)
      throw SolverError(std::string(what) + ": LU factorisation failed", 0.0);
    Field x = lu.solve(b);
    check_linear_residual(a, x, b, config_.linear_tol, what);
    return x;
  }

  const Mesh& mesh_;
  BoundarySpec bc_;
  SolverConfig config_;
  Assembly assembly_;
  SymStencil stencil_;
  EntropyFns fns_;
  PoissonSolver poisson_;
  std::vector<std::pair<double, double>> k_edges_;
  std::vector<std::pair<int, double>> p_fixed_;
  std::vector<std::pair<int, double>> n_fixed_;
};

// ---------------------------------------------------------------------------
// Runs

/// Half the smallest initial density, falling back to 1e-8 when the data
/// touch zero.
inline double default_epsilon(const Field& p0, const Field& n0) {
  const double m = std::min(p0.minCoeff(), n0.minCoeff());
  return m > 0.0 ? 0.5 * m : 1e-8;
}

struct RunResult {
  std::vector<StepReport> reports;  // reports[0] is the initial state
  State final_state;
  InvariantScope scope;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
  double epsilon = 0.0;
  int steps = 0;

  bool completed() const { return !error.has_value(); }
};

/// Flags the theory guarantees for this configuration.
inline InvariantScope invariant_scope(const SolverConfig& config, const BoundarySpec& bc,
                                      const Mesh& mesh, const SparseMatrix& stiffness) {
  InvariantScope s;
  const bool closed = bc.pure_neumann_phi() && !bc.density_dirichlet();
  s.dmp = closed;
  s.mass = !bc.density_dirichlet();
  s.entropy = closed && config.algorithm == Algorithm::alg2 && check_acuteness(mesh, stiffness).is_acute;
  s.smallness = false;  // warned about, never enforced
  return s;
}

inline StepReport make_report(const PicardStepper& stepper, const State& s, int iters) {
  const Assembly& a = stepper.assembly();
  StepReport r;
  r.t = s.t;
  r.mass_p = mass(s.p, a.lumped_diag);
  r.mass_n = mass(s.n, a.lumped_diag);
  r.energy_es = electrostatic_energy(s.phi, a.stiffness);
  try {
    r.entropy = entropy_Eh(s.p, s.n, s.phi, a.lumped_diag, a.stiffness);
  } catch (const DomainError&) {
    r.entropy = std::numeric_limits<double>::quiet_NaN();
  }
  const Field neg_phi = -s.phi;
  r.dissipation = dissipation_Dh(s.p, s.phi, stepper.mesh(), a.stiffness, stepper.entropy_fns()) +
                  dissipation_Dh(s.n, neg_phi, stepper.mesh(), a.stiffness, stepper.entropy_fns());
  const Extrema ep = extrema(s.p), en = extrema(s.n);
  r.max_p = ep.max;
  r.min_p = ep.min;
  r.max_n = en.max;
  r.min_n = en.min;
  r.picard_iters = iters;
  return r;
}

using StepObserver = std::function<void(const State&, const StepReport&)>;

/// Marches M = round(T / k) steps from the initial densities (the initial
/// potential is computed from them). Step errors end the run early with the
/// partial history kept.
inline RunResult run(const Mesh& mesh, const BoundarySpec& bc, SolverConfig config, const Field& p0,
                     const Field& n0, const StepObserver& observer = {}) {
  config.validate();
  bc.validate(mesh);
  if (p0.size() != mesh.num_nodes() || n0.size() != mesh.num_nodes())
    throw std::invalid_argument("run: initial data size does not match mesh");
  RunResult out;
  out.epsilon = config.epsilon ? *config.epsilon : default_epsilon(p0, n0);
  PicardStepper stepper(mesh, bc, config, out.epsilon);
  out.scope = invariant_scope(config, bc, mesh, stepper.assembly().stiffness);

  State s;
  s.p = p0;
  s.n = n0;
  s.t = 0.0;
  s.phi = stepper.potential(s.p, s.n);

  const double lo = std::min(p0.minCoeff(), n0.minCoeff());
  const double hi = std::max(p0.maxCoeff(), n0.maxCoeff());
  if (1.0 - config.k * (hi - lo) <= 0.0)
    out.warnings.push_back("time step violates the smallness condition 1 - k (max - min) > 0");

  StepReport initial = make_report(stepper, s, 0);
  initial.flags = evaluate_flags(initial, nullptr, initial, config.k);
  out.reports.push_back(initial);
  if (observer) observer(s, initial);

  const long steps = std::lround(std::floor(config.T / config.k + 1e-9));
  for (long m = 0; m < steps; ++m) {
    StepResult sr;
    try {
      sr = stepper.step(s);
    } catch (const Error& e) {
      out.error = e.what();
      break;
    }
    s = std::move(sr.state);
    s.t = static_cast<double>(m + 1) * config.k;
    StepReport rep = make_report(stepper, s, sr.iterations);
    rep.flags = evaluate_flags(out.reports.front(), &out.reports.back(), rep, config.k);
    out.reports.push_back(rep);
    ++out.steps;
    if (observer) observer(s, rep);
  }
  out.final_state = s;
  return out;
}

}  // namespace pnp

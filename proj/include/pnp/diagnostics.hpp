#pragma once

// Physical-constraint diagnostics: masses, energies, entropy, dissipation,
// extrema and the per-step invariant flags, plus their CSV persistence.

#include "pnp/core.hpp"
#include "pnp/entropy.hpp"
#include "pnp/mesh.hpp"
#include "pnp/stabilizer.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pnp {

/// Densities may undershoot zero by this much before g0 rejects them.
inline constexpr double kDensityRoundoff = 1e-10;

/// (x, 1)_h.
inline double mass(const Field& x, const Field& lumped_diag) { return lumped_diag.dot(x); }

/// 1/2 |grad phi|^2.
inline double electrostatic_energy(const Field& phi, const SparseMatrix& stiffness) {
  return 0.5 * phi.dot(stiffness * phi);
}

/// E_h = (g0(p), 1)_h + (g0(n), 1)_h + 1/2 |grad phi|^2.
inline double entropy_Eh(const Field& p, const Field& n, const Field& phi, const Field& lumped_diag,
                         const SparseMatrix& stiffness) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (double v : {p[i], n[i]}) {
      if (v < -kDensityRoundoff)
        throw DomainError("entropy_Eh: negative density " + std::to_string(v) + " at node " +
                          std::to_string(i));
      s += lumped_diag[i] * EntropyFns::g0(std::max(v, 0.0));
    }
  }
  return s + electrostatic_energy(phi, stiffness);
}

/// Discrete dissipation of one species transported by potential `psi`
/// (psi = phi for cations, -phi for anions):
///   D_h = -sum_{i<j} K_ij (delta rho + tau delta psi)^2 / tau,
/// which for rho_j != rho_i is |s^{1/2} delta rho + s^{-1/2} delta psi|^2
/// with s = delta g'/delta rho, and tau (delta psi)^2 otherwise.
inline double dissipation_Dh(const Field& rho, const Field& psi, const Mesh& mesh,
                             const SparseMatrix& stiffness, const EntropyFns& fns) {
  double d = 0.0;
  for (const auto& [i, j] : mesh.edges()) {
    const double kij = entry(stiffness, i, j);
    if (kij == 0.0) continue;
    const double t = tau(rho[i], rho[j], fns);
    if (!(t > 0.0))
      throw Error("dissipation_Dh: non-positive secant slope on edge (" + std::to_string(i) + "," +
                  std::to_string(j) + ")");
    const double w = (rho[j] - rho[i]) + t * (psi[j] - psi[i]);
    d -= kij * w * w / t;
  }
  return d;
}

struct Extrema {
  double min = 0.0;
  int argmin = -1;
  double max = 0.0;
  int argmax = -1;
};

/// Exact scan; ties go to the lowest node index.
inline Extrema extrema(const Field& x) {
  if (x.size() == 0) throw std::invalid_argument("extrema: empty field");
  Extrema e{x[0], 0, x[0], 0};
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (x[i] < e.min) e.min = x[i], e.argmin = static_cast<int>(i);
    if (x[i] > e.max) e.max = x[i], e.argmax = static_cast<int>(i);
  }
  return e;
}

struct StepFlags {
  bool dmp_ok = true;
  bool mass_ok = true;
  bool entropy_ok = true;
  bool smallness_ok = true;

  bool operator==(const StepFlags&) const = default;
};

/// Which flags the theory guarantees for a given run.
struct InvariantScope {
  bool dmp = false;
  bool mass = false;
  bool entropy = false;
  bool smallness = false;
};

struct StepReport {
  double t = 0.0;
  double mass_p = 0.0;
  double mass_n = 0.0;
  double energy_es = 0.0;
  double entropy = 0.0;
  double dissipation = 0.0;
  double max_p = 0.0, min_p = 0.0, max_n = 0.0, min_n = 0.0;
  int picard_iters = 0;
  StepFlags flags;
};

struct FlagTolerances {
  double dmp = 1e-10;
  double mass_relative = 1e-10;
  double entropy = 1e-8;
};

/// Flags of `row` against the initial row and the preceding row.
inline StepFlags evaluate_flags(const StepReport& initial, const StepReport* previous,
                                const StepReport& row, double k, const FlagTolerances& tol = {}) {
  StepFlags f;
  const double lo = std::min(initial.min_p, initial.min_n);
  const double hi = std::max(initial.max_p, initial.max_n);
  f.dmp_ok = row.min_p >= lo - tol.dmp && row.min_n >= lo - tol.dmp && row.max_p <= hi + tol.dmp &&
             row.max_n <= hi + tol.dmp;
  auto drift_ok = [&](double m0, double m) {
    const double scale = std::abs(m0) > 0.0 ? std::abs(m0) : 1.0;
    return std::abs(m - m0) <= tol.mass_relative * scale;
  };
  f.mass_ok = drift_ok(initial.mass_p, row.mass_p) && drift_ok(initial.mass_n, row.mass_n);
  f.entropy_ok = previous == nullptr || row.entropy <= previous->entropy + tol.entropy;
  f.smallness_ok = 1.0 - k * (hi - lo) > 0.0;
  return f;
}

/// Recomputes every row's flags from the persisted quantities.
inline std::vector<StepFlags> recompute_flags(const std::vector<StepReport>& rows, double k,
                                              const FlagTolerances& tol = {}) {
  std::vector<StepFlags> out;
  for (std::size_t m = 0; m < rows.size(); ++m)
    out.push_back(evaluate_flags(rows.front(), m == 0 ? nullptr : &rows[m - 1], rows[m], k, tol));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* kCsvHeader =
    "t,mass_p,mass_n,energy_es,entropy,dissipation,max_p,min_p,max_n,min_n,picard_iters,"
    "dmp_ok,mass_ok,entropy_ok,smallness_ok";

inline void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

inline void write_csv_row(std::ostream& os, const StepReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d\n", r.t,
                r.mass_p, r.mass_n, r.energy_es, r.entropy, r.dissipation, r.max_p, r.min_p,
                r.max_n, r.min_n, r.picard_iters, int(r.flags.dmp_ok), int(r.flags.mass_ok),
                int(r.flags.entropy_ok), int(r.flags.smallness_ok));
  os << buf;
}

inline void write_csv(std::ostream& os, const std::vector<StepReport>& rows) {
  write_csv_header(os);
  for (const StepReport& r : rows) write_csv_row(os, r);
}

inline std::vector<StepReport> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw Error("read_csv: missing or unexpected header");
  std::vector<StepReport> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 15) throw Error("read_csv: line " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " columns");
    StepReport r;
    double* dst[] = {&r.t,     &r.mass_p, &r.mass_n, &r.energy_es, &r.entropy,
                     &r.dissipation, &r.max_p, &r.min_p, &r.max_n, &r.min_n};
    for (int c = 0; c < 10; ++c) *dst[c] = std::stod(cells[c]);
    r.picard_iters = std::stoi(cells[10]);
    r.flags.dmp_ok = cells[11] == "1";
    r.flags.mass_ok = cells[12] == "1";
    r.flags.entropy_ok = cells[13] == "1";
    r.flags.smallness_ok = cells[14] == "1";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pnp

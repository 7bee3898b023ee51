#pragma once

// Scenario descriptions: the four built-in experiments, JSON configs on top
// of them, and the glue that turns a scenario into a run with outputs.

#include "pnp/core.hpp"
#include "pnp/expression.hpp"
#include "pnp/fespace.hpp"
#include "pnp/io.hpp"
#include "pnp/mesh.hpp"
#include "pnp/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pnp {

struct MeshSpec {
  enum class Kind { square, channel, acute_rectangle };
  Kind kind = Kind::square;
  int n = 40;           // square: cells per side
  double cell = 0.1;    // channel: lattice spacing
  int nx = 20;          // acute rectangle: nodes per even row minus one
  int rows = 20;        // acute rectangle: number of row gaps (even)
  double width = 1.0;   // acute rectangle

  Mesh build() const {
    switch (kind) {
      case Kind::square: return build_unit_square(n);
      case Kind::channel: return build_channel(cell);
      case Kind::acute_rectangle: return build_acute_rectangle(nx, rows, width);
    }
    throw std::logic_error("MeshSpec: bad kind");
  }
};

struct InitialSpec {
  enum class Kind { smooth, uniform, wave, selective, custom };
  Kind kind = Kind::smooth;
  std::string p_expr, n_expr;  // custom only
  bool averaged = true;        // averaged interpolation instead of nodal
};

struct Scenario {
  std::string name;
  MeshSpec mesh;
  InitialSpec initial;
  BoundarySpec bc;
  SolverConfig solver;
  std::string output_dir = "out";
  std::vector<double> snapshots;

  void validate(const Mesh& m) const {
    solver.validate();
    bc.validate(m);
    for (double t : snapshots)
      if (!(t >= 0.0 && t <= solver.T + 1e-12))
        throw ConfigError("snapshot time " + std::to_string(t) + " outside [0, T]");
  }
};

// ---------------------------------------------------------------------------
// Initial data

/// Two bumps of height 4 and 1 for cations, one bump for anions.
inline double smooth_p0(Point x) {
  const double r1 = std::hypot(x.x + 0.25, x.y), r2 = std::hypot(x.x - 0.25, x.y);
  return 0.5 * std::tanh((1.0 - 10.0 * r1) / 0.1) + 1.5 * std::tanh((1.0 - 10.0 * r2) / 0.1) + 2.0;
}
inline double smooth_n0(Point x) { return 2.0 * (std::tanh((1.0 - 10.0 * std::hypot(x.x, x.y)) / 0.1) + 1.0); }

inline double wave_p0(Point x) { return std::tanh(10.0 * x.y - 6.2) + 1.0; }
inline double wave_n0(Point x) { return -std::tanh(10.0 * x.y - 0.8) + 1.0; }
// Anions piled at the bottom wall, cations at the top wall.
inline double selective_p0(Point x) { return std::tanh(10.0 * x.y - 69.2) + 1.0; }
inline double selective_n0(Point x) { return wave_n0(x); }

inline std::pair<Field, Field> initial_fields(const InitialSpec& spec, const Mesh& mesh) {
  ScalarFunction p, n;
  switch (spec.kind) {
    case InitialSpec::Kind::smooth: p = smooth_p0, n = smooth_n0; break;
    case InitialSpec::Kind::uniform: p = n = [](Point) { return 1.0; }; break;
    case InitialSpec::Kind::wave: p = wave_p0, n = wave_n0; break;
    case InitialSpec::Kind::selective: p = selective_p0, n = selective_n0; break;
    case InitialSpec::Kind::custom: {
      const Expression ep = Expression::parse(spec.p_expr), en = Expression::parse(spec.n_expr);
      p = ep, n = en;
      break;
    }
  }
  if (spec.averaged) return {averaged_interpolate(p, mesh), averaged_interpolate(n, mesh)};
  return {nodal_interpolate(p, mesh), nodal_interpolate(n, mesh)};
}

// ---------------------------------------------------------------------------
// Built-ins

inline Scenario builtin_scenario(const std::string& name, Algorithm algorithm = Algorithm::alg1) {
  Scenario s;
  s.name = name;
  s.solver.algorithm = algorithm;
  if (name == "smooth") {
    s.mesh.kind = MeshSpec::Kind::square;
    s.mesh.n = 40;
    s.initial.kind = InitialSpec::Kind::smooth;
    s.initial.averaged = true;
    s.solver.k = 1e-3;
    s.solver.T = 0.5;
    s.snapshots = {0.0, 0.01, 0.02, 0.1, 0.2, 0.5};
    return s;
  }
  s.mesh.kind = MeshSpec::Kind::channel;
  s.mesh.cell = 0.1;
  s.initial.averaged = false;
  s.solver.k = 1e-2;
  s.solver.T = 1.0;
  s.snapshots = {0.0, 0.01, 0.05, 0.1, 1.0};
  if (name == "channel_uniform") {
    s.initial.kind = InitialSpec::Kind::uniform;
    s.bc.phi_dirichlet = {{BoundaryTag::bottom, -50.0}, {BoundaryTag::top, 50.0}};
  } else if (name == "channel_wave") {
    s.initial.kind = InitialSpec::Kind::wave;
    s.snapshots = {0.0, 0.1, 0.2, 0.35, 1.0};
    s.bc.phi_dirichlet = {{BoundaryTag::bottom, -50.0}, {BoundaryTag::top, 50.0}};
  } else if (name == "channel_selective") {
    s.initial.kind = InitialSpec::Kind::selective;
    s.bc.phi_dirichlet = {{BoundaryTag::bottom, -1.0}, {BoundaryTag::top, 1.0}};
    s.bc.p_dirichlet = {{BoundaryTag::membrane, 1.0}};
    s.solver.T = 10.0;
    s.snapshots = {0.0, 1.0, 2.0, 5.0, 10.0};
  } else {
    throw ConfigError("unknown scenario '" + name +
                      "' (expected smooth, channel_uniform, channel_wave or channel_selective)");
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON configs

namespace detail {

inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

struct ConfigReader {
  const std::string& text;
  std::string source;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    const std::string leaf = path.substr(path.find_last_of('.') + 1);
    const int line = line_of_key(text, leaf);
    throw ConfigError(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + path + ": " + msg);
  }

  void only_keys(const nlohmann::json& obj, const std::string& path, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
  }

  double number(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }
  int integer(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }
  std::string string(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::map<BoundaryTag, double> tag_map(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_object()) fail(path, "expected an object of tag: value");
    std::map<BoundaryTag, double> out;
    for (const auto& [k, val] : v.items()) {
      BoundaryTag tag = BoundaryTag::interior;
      try {
        tag = tag_from_string(k);
      } catch (const std::invalid_argument&) {
      }
      if (tag == BoundaryTag::interior) fail(path + "." + k, "unknown boundary tag");
      out[tag] = number(val, path + "." + k);
    }
    return out;
  }
};

}  // namespace detail

/// Reads a JSON scenario. A "scenario" key starts from that built-in; every
/// other key overrides. Unknown keys are rejected.
inline Scenario parse_config_text(const std::string& text, const std::string& source = "<config>") {
  using nlohmann::json;
  detail::ConfigReader rd{text, source};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  rd.only_keys(j, "", {"scenario", "algorithm", "mesh", "initial", "boundary", "solver", "output", "snapshots"});

  Algorithm alg = Algorithm::alg1;
  if (j.contains("algorithm")) {
    const int a = rd.integer(j["algorithm"], "algorithm");
    if (a != 1 && a != 2) rd.fail("algorithm", "must be 1 or 2");
    alg = a == 1 ? Algorithm::alg1 : Algorithm::alg2;
  }
  Scenario s;
  if (j.contains("scenario")) {
    try {
      s = builtin_scenario(rd.string(j["scenario"], "scenario"), alg);
    } catch (const ConfigError& e) {
      rd.fail("scenario", e.what());
    }
  } else {
    s.name = "custom";
    s.solver.algorithm = alg;
  }

  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    rd.only_keys(m, "mesh", {"type", "n", "cell", "nx", "rows", "width"});
    if (m.contains("type")) {
      const std::string t = rd.string(m["type"], "mesh.type");
      if (t == "square") s.mesh.kind = MeshSpec::Kind::square;
      else if (t == "channel") s.mesh.kind = MeshSpec::Kind::channel;
      else if (t == "acute_rectangle") s.mesh.kind = MeshSpec::Kind::acute_rectangle;
      else rd.fail("mesh.type", "expected square, channel or acute_rectangle");
    }
    if (m.contains("n")) s.mesh.n = rd.integer(m["n"], "mesh.n");
    if (m.contains("cell")) s.mesh.cell = rd.number(m["cell"], "mesh.cell");
    if (m.contains("nx")) s.mesh.nx = rd.integer(m["nx"], "mesh.nx");
    if (m.contains("rows")) s.mesh.rows = rd.integer(m["rows"], "mesh.rows");
    if (m.contains("width")) s.mesh.width = rd.number(m["width"], "mesh.width");
    if (s.mesh.n < 1) rd.fail("mesh.n", "must be >= 1");
    if (!(s.mesh.cell > 0.0)) rd.fail("mesh.cell", "must be positive");
  }

  if (j.contains("initial")) {
    const json& in = j["initial"];
    rd.only_keys(in, "initial", {"type", "p", "n", "interpolation"});
    if (in.contains("type")) {
      const std::string t = rd.string(in["type"], "initial.type");
      if (t == "smooth") s.initial.kind = InitialSpec::Kind::smooth;
      else if (t == "uniform") s.initial.kind = InitialSpec::Kind::uniform;
      else if (t == "wave") s.initial.kind = InitialSpec::Kind::wave;
      else if (t == "selective") s.initial.kind = InitialSpec::Kind::selective;
      else if (t == "custom") s.initial.kind = InitialSpec::Kind::custom;
      else rd.fail("initial.type", "expected smooth, uniform, wave, selective or custom");
    }
    if (in.contains("p")) s.initial.p_expr = rd.string(in["p"], "initial.p");
    if (in.contains("n")) s.initial.n_expr = rd.string(in["n"], "initial.n");
    if (in.contains("interpolation")) {
      const std::string t = rd.string(in["interpolation"], "initial.interpolation");
      if (t != "nodal" && t != "averaged") rd.fail("initial.interpolation", "expected nodal or averaged");
      s.initial.averaged = t == "averaged";
    }
    if (s.initial.kind == InitialSpec::Kind::custom) {
      if (s.initial.p_expr.empty() || s.initial.n_expr.empty())
        rd.fail("initial", "custom data needs both p and n expressions");
      for (const char* key : {"p", "n"}) {
        try {
          Expression::parse(key[0] == 'p' ? s.initial.p_expr : s.initial.n_expr);
        } catch (const ConfigError& e) {
          rd.fail(std::string("initial.") + key, e.what());
        }
      }
    }
  }

  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    rd.only_keys(b, "boundary", {"phi", "p", "n"});
    if (b.contains("phi")) s.bc.phi_dirichlet = rd.tag_map(b["phi"], "boundary.phi");
    if (b.contains("p")) s.bc.p_dirichlet = rd.tag_map(b["p"], "boundary.p");
    if (b.contains("n")) s.bc.n_dirichlet = rd.tag_map(b["n"], "boundary.n");
  }

  if (j.contains("solver")) {
    const json& c = j["solver"];
    rd.only_keys(c, "solver",
                 {"k", "T", "q", "picard_residual_tol", "picard_increment_tol", "picard_max_iters",
                  "linear_tol", "shrink", "max_halvings", "nonmonotone_window", "epsilon", "neutrality_tol", "star"});
    SolverConfig& sc = s.solver;
    auto num = [&](const char* key, double& dst) {
      if (c.contains(key)) dst = rd.number(c[key], std::string("solver.") + key);
    };
    num("k", sc.k);
    num("T", sc.T);
    num("q", sc.q);
    num("picard_residual_tol", sc.picard_residual_tol);
    num("picard_increment_tol", sc.picard_increment_tol);
    num("linear_tol", sc.linear_tol);
    num("shrink", sc.shrink);
    num("neutrality_tol", sc.neutrality_tol);
    if (c.contains("picard_max_iters")) sc.picard_max_iters = rd.integer(c["picard_max_iters"], "solver.picard_max_iters");
    if (c.contains("nonmonotone_window"))
      sc.nonmonotone_window = rd.integer(c["nonmonotone_window"], "solver.nonmonotone_window");
    if (c.contains("max_halvings")) sc.max_halvings = rd.integer(c["max_halvings"], "solver.max_halvings");
    if (c.contains("star")) {
      const std::string v = rd.string(c["star"], "solver.star");
      if (v != "split" && v != "lagged") rd.fail("solver.star", "expected split or lagged");
      sc.star = v == "split" ? StarLinearization::split : StarLinearization::lagged;
    }
    if (c.contains("epsilon")) sc.epsilon = rd.number(c["epsilon"], "solver.epsilon");
    if (c.contains("k") && !(sc.k > 0.0)) rd.fail("solver.k", "time step must be positive");
    if (c.contains("T") && !(sc.T >= 0.0)) rd.fail("solver.T", "final time must be nonnegative");
    if (c.contains("q") && !(sc.q > 0.0)) rd.fail("solver.q", "detector exponent must be positive");
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      rd.fail("solver", e.what());
    }
  }

  if (j.contains("output")) s.output_dir = rd.string(j["output"], "output");
  if (j.contains("snapshots")) {
    if (!j["snapshots"].is_array()) rd.fail("snapshots", "expected an array of times");
    s.snapshots.clear();
    for (std::size_t i = 0; i < j["snapshots"].size(); ++i)
      s.snapshots.push_back(rd.number(j["snapshots"][i], "snapshots"));
  }
  for (double t : s.snapshots)
    if (!(t >= 0.0 && t <= s.solver.T + 1e-12)) rd.fail("snapshots", "time " + std::to_string(t) + " outside [0, T]");
  return s;
}

inline Scenario parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Outputs

inline void write_vtk_snapshot(const State& state, const Mesh& mesh, const std::string& path) {
  char title[64];
  std::snprintf(title, sizeof title, "pnp t=%.17g", state.t);
  write_vtk_file(path, mesh, {{"p", &state.p}, {"n", &state.n}, {"phi", &state.phi}}, title);
}

/// Mass, energy/entropy and extrema charts of a report history.
inline void write_report_charts(const std::vector<StepReport>& rows, const std::string& dir) {
  std::vector<double> t;
  Series mp{"mass p", {}}, mn{"mass n", {}}, es{"1/2|grad phi|^2", {}}, eh{"E_h", {}};
  Series maxp{"max p", {}}, minp{"min p", {}}, maxn{"max n", {}}, minn{"min n", {}};
  for (const StepReport& r : rows) {
    t.push_back(r.t);
    mp.values.push_back(r.mass_p);
    mn.values.push_back(r.mass_n);
    es.values.push_back(r.energy_es);
    eh.values.push_back(r.entropy);
    maxp.values.push_back(r.max_p);
    minp.values.push_back(r.min_p);
    maxn.values.push_back(r.max_n);
    minn.values.push_back(r.min_n);
  }
  auto emit = [&](const std::string& file, const std::string& title, const std::vector<Series>& s) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_svg_chart(os, title, "t", t, s);
  };
  emit("mass.svg", "Mass", {mp, mn});
  emit("energy.svg", "Energy", {es, eh});
  emit("extrema.svg", "Extrema", {maxp, minp, maxn, minn});
}

/// Runs a scenario; `observer` sees every accepted state.
inline RunResult run(const Scenario& sc, const StepObserver& observer = {}) {
  const Mesh mesh = sc.mesh.build();
  sc.validate(mesh);
  const auto [p0, n0] = initial_fields(sc.initial, mesh);
  return run(mesh, sc.bc, sc.solver, p0, n0, observer);
}

/// True when every in-force flag holds on every row.
inline bool flags_hold(const RunResult& r) {
  for (const StepReport& row : r.reports) {
    if (r.scope.dmp && !row.flags.dmp_ok) return false;
    if (r.scope.mass && !row.flags.mass_ok) return false;
    if (r.scope.entropy && !row.flags.entropy_ok) return false;
    if (r.scope.smallness && !row.flags.smallness_ok) return false;
  }
  return true;
}

}  // namespace pnp

// pnp_sim: runs one PNP scenario and writes diagnostics.csv, VTK snapshots
// and SVG charts into the output directory.

#include "pnp/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%.4f.vtk", t);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilised finite element solver for the Poisson-Nernst-Planck system"};

  std::string scenario_name = "smooth";
  std::string config_path;
  std::optional<int> algorithm;
  std::optional<double> k, T, q, epsilon, cell;
  std::optional<int> mesh_n, max_iters;
  std::optional<std::string> out_dir, star;
  std::vector<double> snapshots;
  bool no_strict = false, quiet = false;
  unsigned seed = 0;

  app.add_option("--scenario", scenario_name,
                 "Built-in scenario: smooth, channel_uniform, channel_wave, channel_selective");
  app.add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  app.add_option("--algorithm", algorithm, "1 (shock detector) or 2 (entropy stable)")
      ->check(CLI::IsMember({1, 2}));
  app.add_option("--k", k, "Time step");
  app.add_option("--T", T, "Final time");
  app.add_option("--q", q, "Shock detector exponent");
  app.add_option("--epsilon", epsilon, "Regularisation of the entropy derivative");
  app.add_option("--n", mesh_n, "Cells per side of the square mesh");
  app.add_option("--cell", cell, "Lattice spacing of the channel mesh");
  app.add_option("--max-iters", max_iters, "Picard iteration cap per step");
  app.add_option("--star", star, "Transport linearisation of algorithm 2: split or lagged")
      ->check(CLI::IsMember({"split", "lagged"}));
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--snapshots", snapshots, "Snapshot times t1,t2,...")->delimiter(',');
  app.add_flag("--no-strict", no_strict, "Exit 0 even when an in-force invariant flag fails");
  app.add_flag("--quiet", quiet, "Only print the summary");
  app.add_option("--seed", seed, "Seed for randomised drivers (simulations are deterministic)");

  CLI11_PARSE(app, argc, argv);

  pnp::Scenario sc;
  try {
    if (!config_path.empty()) {
      sc = pnp::parse_config(config_path);
      if (algorithm) sc.solver.algorithm = *algorithm == 1 ? pnp::Algorithm::alg1 : pnp::Algorithm::alg2;
    } else {
      sc = pnp::builtin_scenario(scenario_name, algorithm.value_or(1) == 1 ? pnp::Algorithm::alg1
                                                                             : pnp::Algorithm::alg2);
    }
    if (k) sc.solver.k = *k;
    if (T) {
      sc.solver.T = *T;
      std::erase_if(sc.snapshots, [&](double t) { return t > *T + 1e-12; });
    }
    if (q) sc.solver.q = *q;
    if (epsilon) sc.solver.epsilon = *epsilon;
    if (max_iters) sc.solver.picard_max_iters = *max_iters;
    if (star) sc.solver.star = *star == "lagged" ? pnp::StarLinearization::lagged : pnp::StarLinearization::split;
    if (mesh_n) sc.mesh.n = *mesh_n;
    if (cell) sc.mesh.cell = *cell;
    if (out_dir) sc.output_dir = *out_dir;
    if (!snapshots.empty()) sc.snapshots = snapshots;
    sc.solver.validate();
  } catch (const std::exception& e) {
    std::cerr << "pnp_sim: " << e.what() << '\n';
    return 2;
  }

  std::optional<pnp::Mesh> mesh;
  try {
    mesh = sc.mesh.build();
    sc.validate(*mesh);
  } catch (const std::exception& e) {
    std::cerr << "pnp_sim: " << e.what() << '\n';
    return 2;
  }

  const fs::path out(sc.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "pnp_sim: cannot create '" << out.string() << "': " << ec.message() << '\n';
    return 2;
  }
  const std::string csv_path = (out / "diagnostics.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) {
    std::cerr << "pnp_sim: cannot open '" << csv_path << "'\n";
    return 2;
  }
  pnp::write_csv_header(csv);

  std::vector<bool> written(sc.snapshots.size(), false);
  const double half_step = 0.5 * sc.solver.k;
  auto observer = [&](const pnp::State& s, const pnp::StepReport& r) {
    pnp::write_csv_row(csv, r);
    csv.flush();
    for (std::size_t i = 0; i < sc.snapshots.size(); ++i) {
      if (written[i] || std::abs(s.t - sc.snapshots[i]) > half_step) continue;
      pnp::write_vtk_snapshot(s, *mesh, (out / snapshot_name(sc.snapshots[i])).string());
      written[i] = true;
    }
    if (!quiet)
      std::printf("t=%-10.6g iters=%-3d mass_p=%.12g mass_n=%.12g E_h=%.10g\n", r.t, r.picard_iters,
                  r.mass_p, r.mass_n, r.entropy);
  };

  pnp::RunResult result;
  try {
    const auto [p0, n0] = pnp::initial_fields(sc.initial, *mesh);
    result = pnp::run(*mesh, sc.bc, sc.solver, p0, n0, observer);
    pnp::write_report_charts(result.reports, out.string());
  } catch (const std::exception& e) {
    std::cerr << "pnp_sim: " << e.what() << '\n';
    return 1;
  }

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("scenario %s, algorithm %d, %d nodes, %d steps, epsilon %g\n", sc.name.c_str(),
              sc.solver.algorithm == pnp::Algorithm::alg1 ? 1 : 2, mesh->num_nodes(), result.steps,
              result.epsilon);
  std::printf("in force: dmp=%d mass=%d entropy=%d\n", result.scope.dmp, result.scope.mass,
              result.scope.entropy);
  const bool flags = pnp::flags_hold(result);
  std::printf("flags: %s\n", flags ? "all in-force flags hold" : "an in-force flag failed");
  if (result.error) {
    std::cerr << "run aborted: " << *result.error << '\n';
    return no_strict ? 0 : 1;
  }
  return flags || no_strict ? 0 : 1;
}

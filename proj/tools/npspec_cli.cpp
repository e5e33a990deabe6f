// npspec: resonance sweeps, eigenvalues and reference tables for the
// Neumann-Poincare operator on planar domains.
//
// Exit codes: 0 clean, 1 partial (some cells or criteria failed), 2 failed.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "npspec/acceptance.hpp"
#include "npspec/corner_compress.hpp"
#include "npspec/experiments.hpp"
#include "npspec/io.hpp"
#include "npspec/oracles.hpp"

using namespace npspec;

namespace {

constexpr int kClean = 0, kPartial = 1, kFailed = 2;

struct Overrides {
  std::string config;
  std::optional<int> jobs;
  std::optional<std::string> solver;
  std::optional<std::string> out;
  std::optional<int> nodes_per_panel;
  std::optional<int> panels;
  std::optional<int> corner_levels;
};

void add_run_flags(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "run configuration (JSON)");
  if (config_required) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--solver", o.solver, "linear solver")->check(CLI::IsMember({"brute", "compressed", "both"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--nodes-per-panel", o.nodes_per_panel, "Gauss-Legendre nodes per panel")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--panels", o.panels, "coarse panels per arc (0 = adaptive)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--corner-levels", o.corner_levels, "dyadic refinement levels per corner side")
      ->check(CLI::NonNegativeNumber);
}

RunConfig load(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.solver) cfg.solver = *o.solver;
  if (o.out) cfg.out_dir = *o.out;
  if (o.nodes_per_panel) cfg.nodes_per_panel = *o.nodes_per_panel;
  if (o.panels) cfg.panels = *o.panels;
  if (o.corner_levels) cfg.corner_levels = *o.corner_levels;
  cfg.validate();
  return cfg;
}

void dump_system(const RunConfig& cfg, double t, double delta, const std::string& path) {
  const BoundaryCurve curve = cfg.domain.build();
  const MeshConfig mc = cfg.mesh_config();
  CMatrix m;
  if (solver_kind_from(cfg.solver) == SolverKind::Brute) {
    auto fine = std::make_shared<const PanelMesh>(build_mesh(curve, mc));
    m = -assemble_np(*fine).a.cast<cplx>();
    m.diagonal().array() += cplx(t, delta);
  } else {
    m = build_compression(curve, mc, t, delta).system_matrix;
  }
  io::dump_matrix(path, m);
  spdlog::info("wrote {}x{} system matrix to {}", m.rows(), m.cols(), path);
}

int cmd_sweep(const Overrides& o, const std::optional<std::string>& dump, std::optional<double> dump_t,
              std::optional<double> dump_delta) {
  const RunConfig cfg = load(o);
  if (dump) {
    const std::vector<double> grid = cfg.t_grid.values();
    dump_system(cfg, dump_t.value_or(grid.front()), dump_delta.value_or(cfg.deltas.back()), *dump);
  }
  const SweepRun run = run_sweep(cfg);
  const io::RunStatus st = write_sweep(cfg, run, cfg.out_dir);
  const SpectrumReport& r = run.report;
  std::printf("%s: %zu bands, %zu eigenvalues, %zu embedded resonances, %zu failed cells (%s)\n", cfg.name.c_str(),
              r.bands.size(), r.eigenvalues.size(), r.embedded.size(), run.profile.failures.size(), io::to_string(st));
  for (const Band& b : r.bands) std::printf("  band       [%.6f, %.6f]\n", b.lo, b.hi);
  for (const Claim& c : r.eigenvalues) std::printf("  eigenvalue %.14f  alpha %.4f\n", c.t, c.alpha);
  for (const Claim& c : r.embedded) std::printf("  embedded   %.14f  alpha %.4f\n", c.t, c.alpha);
  std::printf("  wrote %s/{profile.csv,report.json,plotdata/}\n", cfg.out_dir.c_str());
  return static_cast<int>(st);
}

int cmd_eigs(const Overrides& o, const std::optional<std::string>& dump) {
  const RunConfig cfg = load(o);
  if (dump) {
    MeshConfig mc = cfg.mesh_config();
    mc.refine_points.clear();
    const PanelMesh mesh = build_mesh(cfg.domain.build(), mc);
    io::dump_matrix(*dump, assemble_np(mesh).a.cast<cplx>(), false);
  }
  const auto rows = run_eigs(cfg);
  io::write_file(cfg.out_dir + "/eigenvalues.csv", io::eigenvalues_csv(rows));
  double worst = -1.0;
  for (const auto& e : rows)
    if (std::isfinite(e.oracle)) worst = std::max(worst, std::abs(e.value - e.oracle));
  std::printf("%zu eigenvalues written to %s/eigenvalues.csv", rows.size(), cfg.out_dir.c_str());
  if (worst >= 0.0) std::printf(", max abs error %.3g", worst);
  std::printf("\n");
  return kClean;
}

int cmd_table(const std::string& which, const Overrides& o) {
  std::vector<TableRow> rows;
  std::string out = o.out.value_or("out");
  MeshConfig mc;
  if (o.nodes_per_panel) mc.nodes_per_panel = *o.nodes_per_panel;
  if (o.panels) mc.panels_per_arc = *o.panels;
  if (which == "table1") {
    rows = table1(mc);
  } else {
    rows = table2_superellipse(mc);
    if (!o.config.empty()) {
      const RunConfig rect = load(o);
      if (!o.out) out = rect.out_dir;
      auto r = table2_rectangle(rect);
      rows.insert(rows.end(), r.begin(), r.end());
    } else {
      spdlog::warn("no --config given: skipping the rectangle column");
    }
  }
  io::write_file(out + "/" + which + ".csv", table_csv(rows));
  std::printf("%-18s %3s %6s %24s %24s %6s\n", "column", "n", "key", "computed", "reference", "digits");
  for (const TableRow& r : rows)
    std::printf("%-18s %3d %6.2f %24.17g %24.17g %6d\n", r.column.c_str(), r.n, r.key, r.computed, r.reference,
                r.digits);
  return kClean;
}

void emit(const io::Csv& csv, const std::string& out) {
  if (out.empty())
    std::fputs(csv.text().c_str(), stdout);
  else
    io::write_file(out, csv.text());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of the Neumann-Poincare operator on planar domains"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  Overrides sweep_o, eigs_o, table_o;
  std::optional<std::string> sweep_dump, eigs_dump;
  std::optional<double> dump_t, dump_delta;

  auto* sweep = app.add_subcommand("sweep", "resonance sweep over a t grid and a delta ladder");
  add_run_flags(sweep, sweep_o, true);
  sweep->add_option("--dump-matrix", sweep_dump, "write the system matrix (.csv or binary)");
  sweep->add_option("--dump-t", dump_t, "t for --dump-matrix (default: first grid point)");
  sweep->add_option("--dump-delta", dump_delta, "delta for --dump-matrix (default: smallest)");

  auto* eigs = app.add_subcommand("eigs", "largest eigenvalues of a smooth domain");
  add_run_flags(eigs, eigs_o, true);
  eigs->add_option("--dump-matrix", eigs_dump, "write the Nystrom matrix (.csv or binary)");

  std::string which;
  auto* table = app.add_subcommand("table", "computed values next to reference values");
  table->add_option("which", which, "table1 or table2")->required()->check(CLI::IsMember({"table1", "table2"}));
  add_run_flags(table, table_o, false);

  auto* oracle = app.add_subcommand("oracle", "closed-form reference values");
  oracle->require_subcommand(1);
  std::string oracle_out;
  double r = 3.0, a = 1.0, b = 1.0, t = 0.1, delta = 1e-2, theta0 = kPi / 4, angle = kPi / 2;
  int n = 20, count = 101;
  double tmin = -0.45, tmax = 0.45;
  std::vector<double> z{0.0, 3.6};
  auto* o_eig = oracle->add_subcommand("ellipse-eigs", "ellipse eigenvalues for aspect ratio r");
  o_eig->add_option("--r", r, "aspect ratio")->check(CLI::Range(1.0, 1e12));
  o_eig->add_option("--n", n, "pairs")->check(CLI::PositiveNumber);
  auto* o_pt = oracle->add_subcommand("ellipse-pt", "ellipse polarization tensor at t + i delta");
  o_pt->add_option("--a", a, "semi-axis along x");
  o_pt->add_option("--b", b, "semi-axis along y");
  o_pt->add_option("--t", t);
  o_pt->add_option("--delta", delta);
  auto* o_disks = oracle->add_subcommand("disks-alpha", "resonance rate profile of two intersecting disks");
  o_disks->add_option("--a", a, "disk radius");
  o_disks->add_option("--theta0", theta0, "exterior corner half-angle");
  o_disks->add_option("--z", z, "dipole location x y")->expected(2);
  o_disks->add_option("--tmin", tmin);
  o_disks->add_option("--tmax", tmax);
  o_disks->add_option("--count", count)->check(CLI::PositiveNumber);
  auto* o_bound = oracle->add_subcommand("corner-bound", "essential spectrum bound of one corner");
  o_bound->add_option("--angle", angle, "interior angle in radians");
  for (auto* s : {o_eig, o_pt, o_disks, o_bound}) s->add_option("--out", oracle_out, "CSV file (default stdout)");

  acceptance::Options acc;
  auto* check = app.add_subcommand("check", "run the acceptance suite");
  check->add_option("--jobs", acc.jobs, "worker threads")->check(CLI::PositiveNumber);
  check->add_option("--only", acc.only, "criteria to run")->delimiter(',');
  check->add_option("--configs", acc.config_dir, "experiment config directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kClean : kFailed;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*sweep) return cmd_sweep(sweep_o, sweep_dump, dump_t, dump_delta);
    if (*eigs) return cmd_eigs(eigs_o, eigs_dump);
    if (*table) return cmd_table(which, table_o);
    if (*oracle) {
      if (*o_eig) {
        io::Csv csv({"index", "eigenvalue"});
        int i = 0;
        for (double v : oracle::ellipse_eigenvalues(r, n)) csv.row({std::to_string(++i), io::fmt(v)});
        emit(csv, oracle_out);
      } else if (*o_pt) {
        const oracle::Diag2 m = oracle::ellipse_pt(cplx(t, delta), a, b);
        io::Csv csv({"entry", "re", "im"});
        csv.row({"m11", io::fmt(m.m11.real()), io::fmt(m.m11.imag())});
        csv.row({"m22", io::fmt(m.m22.real()), io::fmt(m.m22.imag())});
        emit(csv, oracle_out);
      } else if (*o_disks) {
        TGrid g{tmin, tmax, count};
        io::Csv csv({"t", "alpha"});
        for (double tv : g.values())
          csv.row({io::fmt(tv), io::fmt(oracle::alpha_disks_analytic(tv, {z[0], z[1]}, a, theta0))});
        emit(csv, oracle_out);
      } else {
        io::Csv csv({"angle", "bound"});
        csv.row({io::fmt(angle), io::fmt(oracle::corner_bound(angle))});
        emit(csv, oracle_out);
      }
      return kClean;
    }
    if (*check) {
      acc.on_result = [](const acceptance::Result& res) { std::printf("%s\n", acceptance::format(res).c_str()); };
      const auto results = acceptance::run(acc);
      std::size_t failed = 0;
      for (const auto& res : results) failed += res.pass ? 0 : 1;
      std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
      return failed == 0 ? kClean : failed == results.size() ? kFailed : kPartial;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailed;
  }
  return kFailed;
}

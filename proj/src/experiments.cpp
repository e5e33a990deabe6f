#include "npspec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "npspec/oracles.hpp"

namespace npspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SweepRun run_sweep(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryCurve curve = cfg.domain.build();
  ResolventProblem problem(curve, cfg.mesh_config(), solver_kind_from(cfg.solver));
  const std::vector<DipoleSource> sources = cfg.sources.build(cfg.seed);
  spdlog::info("{}: {} nodes, {} sources, {} t values, {} deltas", cfg.name, problem.mesh().size(), sources.size(),
               cfg.t_grid.count, cfg.deltas.size());

  SweepOptions so;
  so.jobs = cfg.jobs;
  so.refine_peaks = cfg.refine_peaks;
  so.rate_rungs = cfg.rate_rungs;
  SweepRun run;
  run.profile = sweep(problem, cfg.t_grid.values(), cfg.deltas, sources, so);
  run.report = classify(run.profile, cfg.thresholds);

  io::RunInfo& info = run.info;
  info.timestamp = io::utc_timestamp();
  info.mesh_nodes = problem.mesh().size();
  info.graded_nodes = problem.kind() == SolverKind::Compressed ? 0 : problem.graded_mesh().size();
  info.essential_bound = essential_bound(curve);
  try {
    info.symmetry_defect = symmetry_defect(run.profile);
  } catch (const ContractError&) {
    info.symmetry_defect = kNaN;
  }
  info.seconds = seconds_since(t0);
  return run;
}

io::RunStatus write_sweep(const RunConfig& cfg, const SweepRun& run, const std::string& dir) {
  io::write_file(dir + "/profile.csv", io::profile_csv(run.profile));
  io::write_file(dir + "/plotdata/alpha.csv", io::alpha_plot_csv(run.profile));
  io::write_file(dir + "/plotdata/energy.csv", io::energy_plot_csv(run.profile));
  io::write_file(dir + "/report.json", io::report_json(cfg, run.profile, run.report, run.info));
  return io::status_of(run.profile);
}

std::vector<io::EigenRow> run_eigs(const RunConfig& cfg) {
  cfg.validate();
  std::vector<double> params = cfg.family.values();
  const bool family = !params.empty();
  if (!family) params.push_back(0.0);
  std::vector<io::EigenRow> rows;
  for (double v : params) {
    DomainSpec spec = cfg.domain;
    if (family) spec.params[cfg.family.param] = v;
    const BoundaryCurve curve = spec.build();
    if (!curve.corners().empty()) throw ContractError("eigs needs a smooth domain");
    MeshConfig mc = cfg.mesh_config();
    mc.refine_points.clear();
    const PanelMesh mesh = build_mesh(curve, mc);
    const std::vector<double> ev = np_eigenvalues(assemble_np(mesh), cfg.eig_count);

    std::vector<double> oracle;
    if (spec.generator == "ellipse") {
      const double a = spec.params.at("a"), b = spec.params.at("b");
      if (a != b) oracle = oracle::ellipse_eigenvalues(std::max(a, b) / std::min(a, b), cfg.eig_count + 2);
    }
    int n = 0;
    for (double e : ev) {
      if (std::abs(e) < 1e-14) continue;
      double ref = kNaN;
      for (double o : oracle)
        if (!(std::abs(o - e) >= std::abs(ref - e))) ref = o;
      rows.push_back({family ? v : 0.0, ++n, e, ref});
    }
    spdlog::info("eigs: {} nodes, {} eigenvalues{}", mesh.size(), n, family ? " at " + cfg.family.param + "=" + io::fmt(v) : "");
  }
  return rows;
}

int matching_digits(double computed, double reference) {
  if (reference == 0.0) return -1;
  const double rel = std::abs(computed - reference) / std::abs(reference);
  if (!std::isfinite(rel)) return 0;
  if (rel == 0.0) return 17;
  return std::clamp(static_cast<int>(std::floor(-std::log10(rel))), 0, 17);
}

std::string table_csv(const std::vector<TableRow>& rows) {
  io::Csv csv({"column", "n", "key", "computed", "reference", "digits"});
  for (const TableRow& r : rows)
    csv.row({r.column, std::to_string(r.n), io::fmt(r.key), io::fmt(r.computed), io::fmt(r.reference),
             std::to_string(r.digits)});
  return csv.text();
}

const std::vector<std::pair<double, double>>& table1_reference() {
  static const std::vector<std::pair<double, double>> ref{
      {-0.3, 0.0}, {-0.2, 0.018710399304385}, {-0.1, 0.022245420816273},
      {0.1, 0.007687535353992}, {0.2, 0.003180101918936}, {0.3, 0.0}};
  return ref;
}

std::vector<TableRow> table1(const MeshConfig& mesh, double delta) {
  const BoundaryCurve curve = make_intersecting_disks(2.0, kPi / 4);
  const DipoleSource src{0, {3.0, 2.0}, normalized(Vec2{1.0, 1.0})};
  MeshConfig mc = mesh;
  mc.refine_points.push_back(src.z);
  ResolventProblem problem(curve, mc, SolverKind::Compressed);
  std::vector<TableRow> rows;
  int n = 0;
  for (const auto& [t, ref] : table1_reference()) {
    const double ns = problem.dipole_norms(t, delta, {src}).norm_star[0];
    const double e = delta * ns * ns;
    rows.push_back({"energy", ++n, t, e, ref, matching_digits(e, ref)});
  }
  return rows;
}

const std::vector<double>& table2_superellipse_reference() {
  static const std::vector<double> ref{0.4641820097578, 0.4184312731794, 0.3780806619486, 0.3413081257441,
                                       0.3082509222763, 0.2782621209976, 0.2512202243804, 0.2267447370526};
  return ref;
}

const std::vector<double>& table2_rectangle_reference() {
  static const std::vector<double> ref{0.46440817528139, 0.41875518162132, 0.37830131456136, 0.34137309903240,
                                       0.30825666494214, 0.27842565462101, 0.25234907781210};
  return ref;
}

std::vector<TableRow> table2_superellipse(const MeshConfig& mesh) {
  const BoundaryCurve curve = make_superellipse(30.0, 10.0);
  const PanelMesh m = build_mesh(curve, mesh);
  const auto& ref = table2_superellipse_reference();
  std::vector<double> ev = np_eigenvalues(assemble_np(m), 4 * static_cast<int>(ref.size()));
  std::vector<double> pos;
  for (double e : ev)
    if (e > 0.0) pos.push_back(e);
  std::sort(pos.rbegin(), pos.rend());
  std::vector<TableRow> rows;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double c = i < pos.size() ? pos[i] : kNaN;
    rows.push_back({"superellipse_k10", static_cast<int>(i + 1), 0.0, c, ref[i], matching_digits(c, ref[i])});
  }
  return rows;
}

std::vector<TableRow> table2_rectangle(const RunConfig& rect, SweepRun* run_out) {
  SweepRun run = run_sweep(rect);
  std::vector<double> found;
  for (const Claim& c : run.report.eigenvalues)
    if (c.t > 0.0) found.push_back(c.t);
  std::vector<TableRow> rows;
  const auto& ref = table2_rectangle_reference();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double c = kNaN;
    for (double f : found)
      if (!(std::abs(f - ref[i]) >= std::abs(c - ref[i]))) c = f;
    rows.push_back({"rectangle", static_cast<int>(i + 1), 0.0, c, ref[i], matching_digits(c, ref[i])});
  }
  if (run_out) *run_out = std::move(run);
  return rows;
}

}  // namespace npspec

#include "npspec/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "npspec/experiments.hpp"
#include "npspec/oracles.hpp"

#ifndef NPSPEC_CONFIG_DIR
#define NPSPEC_CONFIG_DIR "configs"
#endif

namespace npspec::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string g(double v, int prec = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Result named(int id, const char* title) {
  Result r;
  r.id = id;
  r.title = title;
  return r;
}

class Suite {
 public:
  explicit Suite(const Options& o) : opts_(o), dir_(o.config_dir.empty() ? NPSPEC_CONFIG_DIR : o.config_dir) {}

  RunConfig config(const std::string& name) const {
    RunConfig c = load_config(dir_ + "/" + name + ".json");
    c.jobs = opts_.jobs;
    return c;
  }

  const SweepRun& sweep_of(const std::string& name) {
    auto it = runs_.find(name);
    if (it != runs_.end()) return it->second;
    const auto t0 = Clock::now();
    SweepRun run = run_sweep(config(name));
    spdlog::info("{} sweep: {:.0f} s", name, since(t0));
    return runs_.emplace(name, std::move(run)).first->second;
  }

  Result c1_ellipse();
  Result c2_table1();
  Result c3_disks_profile();
  Result c4_table2();
  Result c5_rectangles();
  Result c6_symmetry();
  Result c7_band_edges();
  Result c8_embedded();
  Result c9_solvers();
  Result c10_rates();

 private:
  Options opts_;
  std::string dir_;
  std::map<std::string, SweepRun> runs_;
};

// Computed and closed-form ellipse spectra, both sorted by value.
double ellipse_error(double r, int pairs, std::size_t* nodes, double* seconds) {
  const auto t0 = Clock::now();
  const PanelMesh m = build_mesh(make_ellipse(r, 1.0), {});
  std::vector<double> ev = np_eigenvalues(assemble_np(m), 2 * pairs);
  std::vector<double> ref = oracle::ellipse_eigenvalues(r, pairs);
  *seconds = since(t0);
  *nodes = m.size();
  if (ev.size() != ref.size()) return INFINITY;
  std::sort(ev.begin(), ev.end());
  std::sort(ref.begin(), ref.end());
  double err = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) err = std::max(err, std::abs(ev[i] - ref[i]));
  return err;
}

Result Suite::c1_ellipse() {
  Result r = named(1, "ellipse spectrum");
  std::size_t n3, n30;
  double s3, s30;
  const double e3 = ellipse_error(3.0, 40, &n3, &s3);
  const double e30 = ellipse_error(30.0, 40, &n30, &s30);
  r.pass = e3 <= 1e-12 && e30 <= 1e-11 && n3 <= 4000 && n30 <= 4000 && s3 <= 60 && s30 <= 60;
  r.detail = "r=3: err " + g(e3) + " (" + std::to_string(n3) + " nodes, " + g(s3, 2) + " s); r=30: err " + g(e30) +
             " (" + std::to_string(n30) + " nodes, " + g(s30, 2) + " s)";
  return r;
}

Result Suite::c2_table1() {
  Result r = named(2, "intersecting disks energy values");
  const auto t0 = Clock::now();
  const std::vector<TableRow> rows = table1();
  const double secs = since(t0);
  r.pass = secs <= 300;
  std::ostringstream d;
  for (const TableRow& row : rows) {
    if (row.reference == 0.0) {
      r.pass = r.pass && std::abs(row.computed) <= 1e-9;
      d << "t=" << g(row.key, 2) << ": " << g(row.computed, 2) << "; ";
    } else {
      r.pass = r.pass && row.digits >= 6;
      d << "t=" << g(row.key, 2) << ": " << row.digits << " digits; ";
    }
  }
  d << g(secs, 3) << " s";
  r.detail = d.str();
  return r;
}

Result Suite::c3_disks_profile() {
  Result r = named(3, "intersecting-disk alpha profile");
  const RunConfig cfg = config("disks");
  const SweepRun& run = sweep_of("disks");
  const IndicatorProfile& p = run.profile;
  const double a = cfg.domain.params.at("a"), theta0 = cfg.domain.params.at("theta0");
  const Vec2 probe{0.0, cfg.sources.radius};
  double worst_out = 0.0, worst_band = 0.0, worst_edge = 0.0, at0 = NAN;
  std::size_t grid = 0;
  bool ok = true;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    if (p.refined[i]) continue;
    ++grid;
    const double t = p.t[i], at = std::abs(t), al = p.alpha_rate[i];
    if (at < 1e-12) {
      at0 = al;
      continue;
    }
    const double expect = oracle::alpha_disks_analytic(t, probe, a, theta0);
    if (!std::isfinite(al)) {
      ok = false;
      continue;
    }
    if (std::abs(at - 0.25) < 1e-9)
      worst_edge = std::max(worst_edge, std::abs(al - expect));
    else if (at > 0.25)
      worst_out = std::max(worst_out, std::abs(al - expect));
    else if (at > 0.02 && at < 0.23)
      worst_band = std::max(worst_band, std::abs(al - expect));
  }
  r.pass = ok && grid == 101 && worst_out <= 0.05 && worst_band <= 0.05 && worst_edge <= 0.07 && at0 > 0.5 &&
           at0 < 1.0;
  r.detail = std::to_string(grid) + " points; |t|>0.25 dev " + g(worst_out) + ", band dev " + g(worst_band) +
             ", t=+-0.25 dev " + g(worst_edge) + ", alpha(0) " + g(at0, 4);
  return r;
}

Result Suite::c4_table2() {
  Result r = named(4, "superellipse and rectangle eigenvalues");
  const std::vector<TableRow> se = table2_superellipse();
  int se_min = 17;
  for (const TableRow& row : se) se_min = std::min(se_min, row.digits);
  const SweepRun& run = sweep_of("rect_r30");
  std::vector<double> found;
  for (const Claim& c : run.report.eigenvalues)
    if (c.t > 0.0) found.push_back(c.t);
  int rect_min = 17;
  const auto& ref = table2_rectangle_reference();
  for (std::size_t n = 0; n < 6; ++n) {
    double best = NAN;
    for (double f : found)
      if (!(std::abs(f - ref[n]) >= std::abs(best - ref[n]))) best = f;
    rect_min = std::min(rect_min, matching_digits(best, ref[n]));
  }
  r.pass = se_min >= 10 && rect_min >= 6;
  r.detail = "superellipse n=1..8: >= " + std::to_string(se_min) + " digits; rectangle n=1..6: >= " +
             std::to_string(rect_min) + " digits (" + std::to_string(found.size()) + " positive eigenvalues found)";
  return r;
}

// Eigenvalue claims outside the essential interval, split by sign.
std::pair<int, int> outside_pairs(const SpectrumReport& rep, double bound) {
  int pos = 0, neg = 0;
  for (const Claim& c : rep.eigenvalues) {
    if (c.t > bound) ++pos;
    if (c.t < -bound) ++neg;
  }
  return {pos, neg};
}

Result Suite::c5_rectangles() {
  Result r = named(5, "rectangle phase transition");
  r.pass = true;
  std::ostringstream d;
  for (const char* name : {"rect_r1", "rect_r2", "rect_r3", "rect_r30"}) {
    const SweepRun& run = sweep_of(name);
    const auto [pos, neg] = outside_pairs(run.report, 0.25);
    const bool thin = std::string(name) == "rect_r3" || std::string(name) == "rect_r30";
    r.pass = r.pass && (thin ? std::min(pos, neg) >= 1 : pos + neg == 0);
    d << name << ": " << pos << "+" << neg << "; ";
  }
  r.detail = d.str() + "eigenvalues outside [-0.25, 0.25]";
  return r;
}

Result Suite::c6_symmetry() {
  Result r = named(6, "spectral symmetry");
  r.pass = true;
  std::ostringstream d;
  double worst = 0.0;
  for (const char* name : {"disks", "rect_r1", "rect_r2", "rect_r3", "rect_r30", "triangle", "perturbed_ellipse"}) {
    const double s = symmetry_defect(sweep_of(name).profile);
    worst = std::max(worst, s);
    r.pass = r.pass && s <= 0.02;
    if (s > 0.02) d << name << " " << g(s) << "; ";
  }
  // smooth domains: +-lambda pairs
  double pair_err = 0.0;
  for (const BoundaryCurve& c : {make_ellipse(3.0, 1.0), make_superellipse(30.0, 10.0)}) {
    const std::vector<double> ev = np_eigenvalues(assemble_np(build_mesh(c, {})), 20);
    std::vector<double> pos, neg;
    for (double e : ev) (e > 0 ? pos : neg).push_back(std::abs(e));
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    if (pos.size() != neg.size()) {
      pair_err = INFINITY;
      continue;
    }
    for (std::size_t i = 0; i < pos.size(); ++i) pair_err = std::max(pair_err, std::abs(pos[i] - neg[i]));
  }
  r.pass = r.pass && pair_err <= 1e-10;
  r.detail = d.str() + "max profile defect " + g(worst) + ", eigenvalue pairing " + g(pair_err);
  return r;
}

Result Suite::c7_band_edges() {
  Result r = named(7, "essential bound at band edges");
  r.pass = true;
  std::ostringstream d;
  for (const char* name : {"rect_r1", "triangle", "disks", "perturbed_ellipse"}) {
    const RunConfig cfg = config(name);
    const SweepRun& run = sweep_of(name);
    const double b = essential_bound(cfg.domain.build());
    const double h = run.profile.grid_step();
    double lo = INFINITY, hi = -INFINITY;
    for (const Band& band : run.report.bands) {
      lo = std::min(lo, band.lo);
      hi = std::max(hi, band.hi);
    }
    const double dev = std::max(std::abs(hi - b), std::abs(lo + b));
    const bool ok = std::isfinite(dev) && dev <= h * (1 + 1e-9);
    r.pass = r.pass && ok;
    d << name << " [" << g(lo, 4) << ", " << g(hi, 4) << "] vs " << g(b, 4) << "; ";
  }
  r.detail = d.str();
  return r;
}

Result Suite::c8_embedded() {
  Result r = named(8, "embedded resonances of the perturbed ellipse");
  const SweepRun& run = sweep_of("perturbed_ellipse");
  bool plus = false, minus = false;
  std::ostringstream d;
  for (const Claim& c : run.report.embedded) {
    plus = plus || std::abs(c.t - 0.2) <= 0.03;
    minus = minus || std::abs(c.t + 0.2) <= 0.03;
    d << g(c.t, 5) << " ";
  }
  r.pass = run.report.embedded.size() >= 2 && plus && minus;
  r.detail = std::to_string(run.report.embedded.size()) + " embedded: " + d.str();
  return r;
}

Result Suite::c9_solvers() {
  Result r = named(9, "solver equivalence and operator identities");
  double gap = 0.0;
  for (const char* name : {"disks", "rect_r3", "triangle", "perturbed_ellipse"}) {
    RunConfig cfg = config(name);
    cfg.corner_levels = 16;
    std::vector<DipoleSource> src = cfg.sources.build(cfg.seed);
    std::vector<DipoleSource> some;
    for (std::size_t i = 0; i < src.size(); i += std::max<std::size_t>(1, src.size() / 4)) some.push_back(src[i]);
    ResolventProblem both(cfg.domain.build(), cfg.mesh_config(), SolverKind::Both);
    for (double t : {-0.3, 0.1})
      for (double delta : {1e-4, 1e-6}) gap = std::max(gap, both.dipole_norms(t, delta, some).solver_gap);
  }
  const PanelMesh em = build_mesh(make_ellipse(3.0, 1.0), {});
  const NpMatrix k = assemble_np(em);
  const double pd = plemelj_defect(k, assemble_slp(em));
  double row = 0.0;
  for (const BoundaryCurve& c : {make_ellipse(3.0, 1.0), make_superellipse(30.0, 10.0)}) {
    const RMatrix dl = double_layer_from(assemble_np(build_mesh(c, {})));
    row = std::max(row, (dl.rowwise().sum().array() - 0.5).abs().maxCoeff());
  }
  const std::vector<double> circ = np_eigenvalues(assemble_np(build_mesh(make_ellipse(1.0, 1.0), {})));
  double circ_max = 0.0;
  for (double e : circ) circ_max = std::max(circ_max, std::abs(e));
  r.pass = gap <= 1e-7 && pd <= 1e-10 && row <= 1e-11 && circ_max <= 1e-11;
  r.detail = "solver gap " + g(gap) + ", Plemelj defect " + g(pd) + ", row sum " + g(row) + ", circle " + g(circ_max);
  return r;
}

Result Suite::c10_rates() {
  Result r = named(10, "resonance rates");
  const SweepRun& rect = sweep_of("rect_r30");
  double top_t = NAN, top_slope = NAN;
  for (const Claim& c : rect.report.eigenvalues)
    if (!(c.t <= top_t)) {
      top_t = c.t;
      std::vector<double> ds, ns;
      for (const LadderRow& l : c.evidence) {
        ds.push_back(l.delta);
        ns.push_back(l.norm_star);
      }
      top_slope = ds.size() >= 2 ? -ladder_slope(ds, ns) : NAN;
    }
  const IndicatorProfile& p = sweep_of("disks").profile;
  const std::size_t i = p.index_of(0.1);
  double band_slope = NAN;
  if (p.rate_source[i] >= 0) {
    std::vector<double> ns;
    for (std::size_t di = 0; di < p.deltas.size(); ++di)
      ns.push_back(p.at(i, di, static_cast<std::size_t>(p.rate_source[i])).norm_star);
    band_slope = -ladder_slope(p.deltas, ns);
  }
  r.pass = std::abs(top_slope + 1.0) <= 0.05 && std::abs(band_slope + 0.5) <= 0.05;
  r.detail = "rectangle r=30 at t=" + g(top_t, 14) + ": slope " + g(top_slope, 4) + "; disks at t=0.1: slope " +
             g(band_slope, 4);
  return r;
}

}  // namespace

std::vector<Result> run(const Options& opts) {
  Suite s(opts);
  using Fn = Result (Suite::*)();
  const Fn all[] = {&Suite::c1_ellipse,   &Suite::c2_table1,   &Suite::c3_disks_profile, &Suite::c4_table2,
                    &Suite::c5_rectangles, &Suite::c6_symmetry, &Suite::c7_band_edges,    &Suite::c8_embedded,
                    &Suite::c9_solvers,    &Suite::c10_rates};
  std::vector<Result> out;
  for (int id = 1; id <= 10; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
    const auto t0 = Clock::now();
    Result r;
    try {
      r = (s.*all[id - 1])();
    } catch (const std::exception& e) {
      r = named(id, ("criterion " + std::to_string(id)).c_str());
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = since(t0);
    if (opts.on_result) opts.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format(const Result& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d  %-44s ", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str());
  return head + r.detail + " [" + g(r.seconds, 3) + " s]";
}

}  // namespace npspec::acceptance

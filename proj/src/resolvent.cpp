#include "npspec/resolvent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <utility>

#include <spdlog/spdlog.h>

#include "npspec/simd/kernels.hpp"

namespace npspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_source(const BoundaryCurve& curve, Vec2 z) {
  const double tol = 1e-12 * std::max(1.0, curve.max_radius());
  if (curve.contains(z, tol)) throw InvalidSource("dipole location is inside or on the boundary");
}

CVector dipole_column(const PanelMesh& mesh, Vec2 z, Vec2 d) {
  const std::size_t n = mesh.size();
  std::vector<double> x(n), y(n), nx(n), ny(n), out(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = mesh.x[j].x;
    y[j] = mesh.x[j].y;
    nx[j] = mesh.normal[j].x;
    ny[j] = mesh.normal[j].y;
  }
  simd::dipole_flux({x.data(), y.data(), nx.data(), ny.data(), n, z.x, z.y, d.x, d.y, out.data()});
  CVector f(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) f[static_cast<Eigen::Index>(j)] = out[j];
  return f;
}

CMatrix dipole_matrix(const PanelMesh& mesh, const std::vector<DipoleSource>& sources) {
  CMatrix f(static_cast<Eigen::Index>(mesh.size()), static_cast<Eigen::Index>(sources.size()));
  for (std::size_t s = 0; s < sources.size(); ++s)
    f.col(static_cast<Eigen::Index>(s)) = project_mean_zero(mesh, dipole_column(mesh, sources[s].z, sources[s].d));
  return f;
}

std::vector<double> energies_to_norms(const PanelMesh& mesh, cplx lambda, const std::vector<DipoleSource>& sources,
                                      const CMatrix& phi) {
  std::vector<double> out(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    double e = dipole_energy(mesh, lambda, sources[s], phi.col(static_cast<Eigen::Index>(s))) / lambda.imag();
    out[s] = e > 0.0 ? std::sqrt(e) : 0.0;
  }
  return out;
}

// Runs body(i) for i in [0, n) on `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct TRow {
  double t = 0.0;
  bool refined = false;
  std::vector<SpectralSample> samples;  // delta-major, then source
  std::vector<CellFailure> failures;
};

TRow evaluate_row(const ResolventProblem& problem, double t, const std::vector<double>& deltas,
                  const std::vector<DipoleSource>& sources) {
  TRow row;
  row.t = t;
  row.samples.resize(deltas.size() * sources.size());
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    for (std::size_t si = 0; si < sources.size(); ++si) {
      SpectralSample& s = row.samples[di * sources.size() + si];
      s.t = t;
      s.delta = delta;
      s.source_id = sources[si].id;
      s.alpha = kNaN;
      s.norm_star = kNaN;
    }
    try {
      DipoleBatch b = problem.dipole_norms(t, delta, sources);
      for (std::size_t si = 0; si < sources.size(); ++si) {
        SpectralSample& s = row.samples[di * sources.size() + si];
        s.norm_star = b.norm_star[si];
        s.alpha = alpha_of(s.norm_star, delta, &s.zero_norm);
        s.cond = b.cond;
        s.ok = true;
      }
    } catch (const Error& e) {
      row.failures.push_back({t, delta, e.what()});
      spdlog::warn("solve failed at t={} delta={}: {}", t, delta, e.what());
    }
  }
  return row;
}

// Failed rungs are skipped; NaN when the source is unusable at this t.
double source_slope(const IndicatorProfile& p, std::size_t ti, std::size_t si, int rungs) {
  std::vector<double> ds, ns;
  for (std::size_t di = 0; di < p.deltas.size(); ++di) {
    const SpectralSample& s = p.at(ti, di, si);
    if (!s.ok) continue;
    if (s.zero_norm) return kNaN;
    ds.push_back(s.delta);
    ns.push_back(s.norm_star);
  }
  if (ds.size() < 2) return kNaN;
  return ladder_slope(ds, ns, rungs, p.t[ti] == 0.0);
}

// Largest full-ladder slope over sources.
double ladder_rate(const IndicatorProfile& p, std::size_t ti) {
  double best = kNaN;
  for (std::size_t si = 0; si < p.sources.size(); ++si) {
    const double s = source_slope(p, ti, si, 0);
    if (std::isfinite(s) && !(s <= best)) best = s;
  }
  return best;
}

void aggregate(IndicatorProfile& p) {
  const std::size_t nt = p.t.size(), nd = p.deltas.size(), ns = p.sources.size();
  p.alpha_sharp.assign(nt, kNaN);
  p.alpha_rate.assign(nt, kNaN);
  p.rate_source.assign(nt, -1);
  p.mu.assign(nt, kNaN);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    double best_sharp = -std::numeric_limits<double>::infinity();
    double best_rate = -std::numeric_limits<double>::infinity();
    double best_mu = -std::numeric_limits<double>::infinity();
    for (std::size_t si = 0; si < ns; ++si) {
      const SpectralSample& last = p.at(ti, nd - 1, si);
      if (last.ok) {
        best_sharp = std::max(best_sharp, last.alpha);
        best_mu = std::max(best_mu, last.delta * last.norm_star * last.norm_star);
      }
      const double slope = source_slope(p, ti, si, p.rate_rungs);
      if (!std::isfinite(slope)) continue;
      if (slope > best_rate) {
        best_rate = slope;
        p.rate_source[ti] = static_cast<int>(si);
      }
    }
    if (std::isfinite(best_sharp)) p.alpha_sharp[ti] = best_sharp;
    if (std::isfinite(best_rate)) p.alpha_rate[ti] = best_rate;
    if (std::isfinite(best_mu)) p.mu[ti] = best_mu;
  }
}

void assemble_profile(IndicatorProfile& p, std::vector<TRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TRow& a, const TRow& b) { return a.t < b.t; });
  p.t.clear();
  p.refined.clear();
  p.samples.clear();
  p.failures.clear();
  for (TRow& r : rows) {
    p.t.push_back(r.t);
    p.refined.push_back(r.refined ? 1 : 0);
    p.samples.insert(p.samples.end(), r.samples.begin(), r.samples.end());
    p.failures.insert(p.failures.end(), r.failures.begin(), r.failures.end());
  }
  aggregate(p);
}

// Vertex (tv, gv) of the parabola through three points.
bool parabola_vertex(double t0, double g0, double t1, double g1, double t2, double g2, double& tv, double& gv) {
  const double d01 = (g1 - g0) / (t1 - t0), d12 = (g2 - g1) / (t2 - t1);
  const double c2 = (d12 - d01) / (t2 - t0);
  if (!(c2 > 0.0)) return false;
  const double c1 = d01 - c2 * (t0 + t1);
  tv = -c1 / (2.0 * c2);
  gv = g1 + (tv - t1) * (d01 + c2 * (tv - t0));
  return std::isfinite(tv) && std::isfinite(gv);
}

struct Candidate {
  std::size_t index = 0;
  double t = 0.0;
  double score = 0.0;
  std::size_t source = 0;
};

std::vector<Candidate> peak_candidates(const IndicatorProfile& p, double zero_window) {
  std::vector<Candidate> out;
  const std::size_t nt = p.t.size();
  if (nt < 3) return out;
  for (std::size_t si = 0; si < p.sources.size(); ++si) {
    std::vector<double> g(nt, kNaN);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const SpectralSample& s = p.at(ti, 0, si);
      if (s.ok && s.norm_star > 0.0) g[ti] = 1.0 / (s.norm_star * s.norm_star);
    }
    for (std::size_t i = 1; i + 1 < nt; ++i) {
      if (!(g[i] <= g[i - 1] && g[i] <= g[i + 1])) continue;
      if (std::abs(p.t[i]) < zero_window) continue;
      double tv, gv;
      if (!parabola_vertex(p.t[i - 1], g[i - 1], p.t[i], g[i], p.t[i + 1], g[i + 1], tv, gv)) continue;
      if (tv < p.t[i - 1] || tv > p.t[i + 1]) continue;
      // a narrow peak between grid points fits a parabola badly; a deep
      // dip against both neighbours counts as well
      const double dip = g[i] / std::min(g[i - 1], g[i + 1]);
      const double score = std::min(gv / g[i], dip);
      if (score > 0.25) continue;
      auto it = std::find_if(out.begin(), out.end(), [&](const Candidate& c) {
        return c.index + 1 >= i && c.index <= i + 1;
      });
      if (it == out.end())
        out.push_back({i, tv, score, si});
      else if (score < it->score)
        *it = {i, tv, score, si};
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
  return out;
}

std::vector<LadderRow> ladder_of(const IndicatorProfile& p, std::size_t ti, std::size_t si) {
  std::vector<LadderRow> rows;
  for (std::size_t di = 0; di < p.deltas.size(); ++di) {
    const SpectralSample& s = p.at(ti, di, si);
    rows.push_back({s.delta, s.norm_star, s.alpha});
  }
  return rows;
}

Claim claim_at(const IndicatorProfile& p, std::size_t ti) {
  Claim c;
  c.t = p.t[ti];
  c.alpha = p.alpha_rate[ti];
  const int si = p.rate_source[ti];
  if (si >= 0) {
    c.source_id = p.sources[static_cast<std::size_t>(si)].id;
    c.evidence = ladder_of(p, ti, static_cast<std::size_t>(si));
  }
  return c;
}

}  // namespace

std::vector<DipoleSource> source_ring(double radius, int positions, int orientations) {
  if (!(radius > 0.0) || positions < 1 || orientations < 1) throw ParameterError("source ring needs radius > 0 and counts >= 1");
  std::vector<DipoleSource> out;
  for (int p = 0; p < positions; ++p) {
    const double a = 2.0 * kPi * p / positions;
    for (int o = 0; o < orientations; ++o) {
      const double b = kPi * o / orientations;
      out.push_back({p * orientations + o, {radius * std::cos(a), radius * std::sin(a)}, {std::cos(b), std::sin(b)}});
    }
  }
  return out;
}

std::vector<DipoleSource> source_ring_random(double radius, int positions, int orientations, std::uint64_t seed) {
  std::vector<DipoleSource> out = source_ring(radius, positions, orientations);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (DipoleSource& s : out) {
    const double b = angle(rng);
    s.d = {std::cos(b), std::sin(b)};
  }
  return out;
}

Density dipole_source(const PanelMesh& mesh, Vec2 z, Vec2 d, double* raw_mean) {
  if (std::abs(norm(d) - 1.0) > 1e-12) throw ParameterError("dipole direction must be a unit vector");
  if (!mesh.curve) throw ContractError("mesh has no curve");
  check_source(*mesh.curve, z);
  CVector f = dipole_column(mesh, z, d);
  if (raw_mean) *raw_mean = std::abs(weighted_mean_numerator(mesh, f));
  return Density{project_mean_zero(mesh, f), &mesh};
}

double alpha_of(double norm_star, double delta, bool* zero_norm) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("alpha needs 0 < delta < 1");
  if (!(norm_star >= 0.0)) throw ParameterError("star norm must be nonnegative");
  if (zero_norm) *zero_norm = norm_star == 0.0;
  if (norm_star == 0.0) return 0.0;
  return -std::log(norm_star) / std::log(delta);
}

const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Brute: return "brute";
    case SolverKind::Compressed: return "compressed";
    case SolverKind::Both: return "both";
  }
  return "?";
}

SolverKind solver_kind_from(const std::string& name) {
  if (name == "brute") return SolverKind::Brute;
  if (name == "compressed") return SolverKind::Compressed;
  if (name == "both") return SolverKind::Both;
  throw ParameterError("unknown solver '" + name + "' (expected brute, compressed or both)");
}

ResolventProblem::ResolventProblem(const BoundaryCurve& curve, const MeshConfig& cfg, SolverKind kind,
                                   const CompressionOptions& opts)
    : curve_(std::make_shared<const BoundaryCurve>(curve)), cfg_(cfg), kind_(kind), opts_(opts) {
  cfg_.validate();
  if (kind_ == SolverKind::Both) opts_.tail = CompressionOptions::Tail::Truncated;
  if (kind_ != SolverKind::Brute) {
    coarse_ = coarse_mesh_for(*curve_, cfg_);
    coarse_np_ = assemble_np(*coarse_).a;
  }
  if (kind_ != SolverKind::Compressed) {
    graded_ = std::make_shared<const PanelMesh>(build_mesh(*curve_, cfg_));
    graded_np_ = assemble_np(*graded_).a;
  }
}

const PanelMesh& ResolventProblem::mesh() const { return kind_ == SolverKind::Brute ? *graded_ : *coarse_; }

const PanelMesh& ResolventProblem::graded_mesh() const {
  if (!graded_) throw ContractError("compressed problems keep no graded mesh");
  return *graded_;
}

CMatrix ResolventProblem::solve(double t, double delta, const CMatrix& f, double* residual, double* cond) const {
  if (kind_ == SolverKind::Brute) {
    BruteForceSystem sys = build_brute_force(graded_, t, delta, &graded_np_);
    if (cond) *cond = 1.0 / sys.rcond;
    return sys.solve(f, residual);
  }
  CompressedSystem sys = build_compression(coarse_, cfg_, t, delta, opts_, &coarse_np_);
  CompressedSolution sol = sys.solve(f);
  if (residual) *residual = sol.residual;
  if (cond) *cond = 1.0 / sys.rcond;
  return sol.rho_hat;
}

DipoleBatch ResolventProblem::dipole_norms(double t, double delta, const std::vector<DipoleSource>& sources) const {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  for (const DipoleSource& s : sources) check_source(*curve_, s.z);
  DipoleBatch out;
  const cplx lambda(t, delta);
  const PanelMesh& m = mesh();
  CMatrix phi = solve(t, delta, dipole_matrix(m, sources), &out.residual, &out.cond);
  out.norm_star = energies_to_norms(m, lambda, sources, phi);
  if (kind_ == SolverKind::Both) {
    double res = 0.0;
    BruteForceSystem sys = build_brute_force(graded_, t, delta, &graded_np_);
    CMatrix pb = sys.solve(dipole_matrix(*graded_, sources), &res);
    out.residual = std::max(out.residual, res);
    out.norm_star_brute = energies_to_norms(*graded_, lambda, sources, pb);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const double a = out.norm_star[s], b = out.norm_star_brute[s];
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) out.solver_gap = std::max(out.solver_gap, std::abs(a - b) / scale);
    }
  }
  return out;
}

ResolventSolution solve_resolvent(const ResolventProblem& problem, double t, double delta, const Density& f) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  const PanelMesh& m = problem.mesh();
  if (f.mesh != &m) throw ContractError("density does not live on the problem mesh");
  double mass = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) mass += m.weight[j] * std::abs(f.values[static_cast<Eigen::Index>(j)]);
  if (std::abs(weighted_mean_numerator(m, f.values)) > 1e-10 * std::max(mass, 1e-300))
    throw ContractError("right-hand side is not mean-zero");
  ResolventSolution out;
  CMatrix phi = problem.solve(t, delta, f.values, &out.residual, &out.cond);
  out.phi = Density{phi.col(0), &m};
  return out;
}

double dipole_energy(const PanelMesh& mesh, cplx lambda, const DipoleSource& s, const CVector& phi) {
  cplx q = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const Vec2 r = mesh.x[j] - s.z;
    q += mesh.weight[j] * dot(s.d, r) / (2.0 * kPi * norm2(r)) * phi[static_cast<Eigen::Index>(j)];
  }
  return std::imag((lambda - 0.5) * q);
}

double IndicatorProfile::grid_step() const {
  double h = std::numeric_limits<double>::infinity();
  double prev = kNaN;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (refined[i]) continue;
    if (std::isfinite(prev)) h = std::min(h, t[i] - prev);
    prev = t[i];
  }
  return h;
}

std::size_t IndicatorProfile::index_of(double tv) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - tv) < std::abs(t[best] - tv)) best = i;
  if (t.empty() || std::abs(t[best] - tv) > 1e-9) throw ContractError("t value is not in the profile");
  return best;
}

double ladder_slope(const std::vector<double>& deltas, const std::vector<double>& norms, int rungs, bool log_corrected) {
  if (deltas.size() != norms.size() || deltas.size() < 2) throw ParameterError("ladder needs at least two rungs");
  std::size_t first = 0;
  if (rungs > 0 && static_cast<std::size_t>(rungs) < deltas.size()) first = deltas.size() - static_cast<std::size_t>(rungs);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(deltas.size() - first);
  for (std::size_t i = first; i < deltas.size(); ++i) {
    const double x = std::log(deltas[i]);
    double y = -std::log(norms[i]);
    if (log_corrected) y += 0.5 * std::log(std::abs(x));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double refine_peak(const ResolventProblem& problem, double t0, double h, double delta, const DipoleSource& source) {
  const std::vector<DipoleSource> one{source};
  std::vector<std::pair<double, double>> pts;  // (t, 1 / ||phi||^2), kept sorted by t
  auto eval = [&](double t) {
    double n = problem.dipole_norms(t, delta, one).norm_star[0];
    const double g = n > 0.0 ? 1.0 / (n * n) : std::numeric_limits<double>::infinity();
    pts.insert(std::upper_bound(pts.begin(), pts.end(), std::make_pair(t, g)), {t, g});
  };
  eval(t0 - h);
  eval(t0);
  eval(t0 + h);
  double best = t0;
  for (int it = 0; it < 40; ++it) {
    std::size_t m = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].second < pts[m].second) m = i;
    best = pts[m].first;
    if (m == 0 || m + 1 == pts.size()) {
      // minimum at the edge of the sampled set: step outward
      const double w = pts.back().first - pts.front().first;
      eval(m == 0 ? pts.front().first - w : pts.back().first + w);
      continue;
    }
    const auto [tl, gl] = pts[m - 1];
    const auto [tc, gc] = pts[m];
    const auto [tr, gr] = pts[m + 1];
    if (tr - tl < 1e-13 * std::max(1.0, std::abs(tc))) break;
    double tv, gv;
    if (!parabola_vertex(tl, gl, tc, gc, tr, gr, tv, gv)) break;
    tv = std::clamp(tv, tl, tr);
    if (std::abs(tv - tc) < 1e-14 * std::max(1.0, std::abs(tc))) {
      best = tv;
      break;
    }
    if (tv == tl || tv == tr) tv = 0.5 * (tc + (tv == tl ? tl : tr));
    eval(tv);
  }
  return best;
}

IndicatorProfile sweep(const ResolventProblem& problem, const std::vector<double>& t_grid,
                       const std::vector<double>& deltas_in, const std::vector<DipoleSource>& sources,
                       const SweepOptions& opts) {
  if (t_grid.empty()) throw ParameterError("empty t grid");
  if (deltas_in.empty()) throw ParameterError("empty delta ladder");
  if (sources.empty()) throw ParameterError("no sources");
  for (double t : t_grid)
    if (!(t > -0.5 && t < 0.5)) throw ParameterError("t grid must lie inside (-1/2, 1/2)");
  std::vector<double> deltas = deltas_in;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0)) throw ParameterError("delta ladder must lie inside (0, 1)");
  for (const DipoleSource& s : sources) check_source(problem.curve(), s.z);

  IndicatorProfile p;
  p.deltas = deltas;
  p.sources = sources;
  p.rate_rungs = opts.rate_rungs;
  std::vector<double> grid = t_grid;
  std::sort(grid.begin(), grid.end());

  std::vector<TRow> rows(grid.size());
  std::atomic<std::size_t> done{0};
  parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
    rows[i] = evaluate_row(problem, grid[i], deltas, sources);
    const std::size_t k = ++done;
    if (k % std::max<std::size_t>(1, grid.size() / 10) == 0) spdlog::info("sweep: {}/{} t values", k, grid.size());
  });
  assemble_profile(p, rows);
  if (!opts.refine_peaks || grid.size() < 3) return p;

  const double h = p.grid_step();
  std::vector<Candidate> cands = peak_candidates(p, Thresholds{}.zero_window_cells * h);
  if (cands.size() > static_cast<std::size_t>(std::max(opts.max_peaks, 0))) cands.resize(static_cast<std::size_t>(opts.max_peaks));
  if (cands.empty()) return p;
  spdlog::info("sweep: refining {} resolvent peaks", cands.size());
  std::vector<double> peaks(cands.size(), kNaN);
  parallel_for(cands.size(), opts.jobs, [&](std::size_t c) {
    try {
      peaks[c] = refine_peak(problem, cands[c].t, h / 8, deltas.back(), sources[cands[c].source]);
    } catch (const Error& e) {
      spdlog::warn("peak refinement near t={} failed: {}", cands[c].t, e.what());
    }
  });
  std::vector<double> fresh;
  for (double t : peaks) {
    if (!std::isfinite(t) || t <= grid.front() || t >= grid.back()) continue;
    bool dup = false;
    for (double u : p.t) dup = dup || std::abs(u - t) < 1e-12;
    for (double u : fresh) dup = dup || std::abs(u - t) < 1e-12;
    if (!dup) fresh.push_back(t);
  }
  std::vector<TRow> extra(fresh.size());
  parallel_for(fresh.size(), opts.jobs, [&](std::size_t i) {
    extra[i] = evaluate_row(problem, fresh[i], deltas, sources);
    extra[i].refined = true;
  });
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    TRow r;
    r.t = p.t[i];
    r.refined = p.refined[i] != 0;
    auto first = p.samples.begin() + static_cast<std::ptrdiff_t>(i * deltas.size() * sources.size());
    r.samples.assign(first, first + static_cast<std::ptrdiff_t>(deltas.size() * sources.size()));
    for (const CellFailure& f : p.failures)
      if (f.t == r.t) r.failures.push_back(f);
    extra.push_back(std::move(r));
  }
  assemble_profile(p, std::move(extra));
  return p;
}

SpectrumReport classify(const IndicatorProfile& p, const Thresholds& th) {
  SpectrumReport rep;
  const std::size_t nt = p.t.size();
  const double h = p.grid_step();
  const double zero_window = std::isfinite(h) ? th.zero_window_cells * h : 0.0;
  // F failed, R resolvent, C continuous, P pure point, U between thresholds
  std::vector<char> label(nt, 'U');
  for (std::size_t i = 0; i < nt; ++i) {
    const double a = p.alpha_rate[i];
    const bool near_zero = std::abs(p.t[i]) < zero_window;
    if (!std::isfinite(a))
      label[i] = 'F';
    else if (near_zero && a > th.continuous_hi)
      label[i] = 'C';
    else if (a >= th.pure_point)
      label[i] = 'P';
    else if (a >= th.continuous_lo && a <= th.continuous_hi)
      label[i] = 'C';
    else if (a <= th.resolvent)
      label[i] = 'R';
  }
  auto isolated = [&](std::size_t a, std::size_t b) {
    if (a == 0 || b + 1 >= nt) return false;
    const double l = p.alpha_rate[a - 1], r = p.alpha_rate[b + 1];
    return l < th.isolation && r < th.isolation;
  };
  auto best_in = [&](std::size_t a, std::size_t b) {
    std::size_t k = a;
    for (std::size_t i = a; i <= b; ++i)
      if (p.alpha_rate[i] > p.alpha_rate[k]) k = i;
    return k;
  };
  auto point_group = [&](std::size_t a, std::size_t b) {
    if (isolated(a, b))
      rep.eigenvalues.push_back(claim_at(p, best_in(a, b)));
    else
      for (std::size_t i = a; i <= b; ++i) rep.unclassified.push_back({p.t[i], p.alpha_rate[i], "alpha near 1 but not isolated"});
  };
  std::size_t i = 0;
  while (i < nt) {
    const char c = label[i];
    if (c == 'R') {
      ++rep.resolvent_cells;
      ++i;
      continue;
    }
    if (c == 'F' || c == 'U') {
      rep.unclassified.push_back({p.t[i], p.alpha_rate[i], c == 'F' ? "solve failed" : "alpha between thresholds"});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < nt && (label[j + 1] == 'C' || label[j + 1] == 'P')) ++j;
    std::size_t first_c = nt, last_c = nt;
    for (std::size_t k = i; k <= j; ++k)
      if (label[k] == 'C') {
        if (first_c == nt) first_c = k;
        last_c = k;
      }
    if (first_c == nt) {
      point_group(i, j);
    } else {
      if (first_c > i) point_group(i, first_c - 1);
      Band band{p.t[first_c], p.t[last_c], {claim_at(p, first_c), claim_at(p, last_c)}};
      rep.bands.push_back(std::move(band));
      for (std::size_t k = first_c; k <= last_c; ++k) {
        if (label[k] != 'P') continue;
        std::size_t e = k;
        while (e + 1 <= last_c && label[e + 1] == 'P') ++e;
        rep.embedded.push_back(claim_at(p, best_in(k, e)));
        k = e;
      }
      if (last_c < j) point_group(last_c + 1, j);
    }
    i = j + 1;
  }
  return rep;
}

MuEstimate estimate_mu(const IndicatorProfile& p, double t, int source) {
  const std::size_t ti = p.index_of(t);
  const std::size_t nd = p.deltas.size();
  MuEstimate out;
  std::size_t si = 0;
  if (source >= 0) {
    if (static_cast<std::size_t>(source) >= p.sources.size()) throw ParameterError("source index out of range");
    si = static_cast<std::size_t>(source);
  } else {
    double best = -1.0;
    for (std::size_t s = 0; s < p.sources.size(); ++s) {
      const SpectralSample& x = p.at(ti, nd - 1, s);
      if (!x.ok) continue;
      const double v = x.delta * x.norm_star * x.norm_star;
      if (v > best) {
        best = v;
        si = s;
      }
    }
  }
  out.source_id = p.sources[si].id;
  for (std::size_t di = 0; di < nd; ++di) {
    const SpectralSample& x = p.at(ti, di, si);
    out.ladder.push_back(x.ok ? x.delta * x.norm_star * x.norm_star : kNaN);
  }
  out.value = kNaN;
  if (nd < 3) return out;
  const double va = out.ladder[nd - 3], vb = out.ladder[nd - 2], vc = out.ladder[nd - 1];
  if (!std::isfinite(va) || !std::isfinite(vb) || !std::isfinite(vc)) return out;
  const double d1 = vb - va, d2 = vc - vb;
  const double scale = std::max({std::abs(va), std::abs(vb), std::abs(vc)});
  out.converged = std::abs(d2) <= 0.1 * std::abs(d1) + 1e-12 * scale && std::abs(d2) <= 1e-2 * scale + 1e-12;
  if (out.converged) {
    // error linear in delta
    const double da = p.deltas[nd - 2], db = p.deltas[nd - 1];
    out.value = vc + d2 * db / (da - db);
  }
  return out;
}

double symmetry_defect(const IndicatorProfile& p) {
  const double h = p.grid_step();
  const double tol = 1e-9 * (std::isfinite(h) ? std::max(h, 1e-3) : 1.0);
  double worst = 0.0;
  bool paired = false;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    if (p.refined[i] || p.t[i] < 0.0) continue;
    for (std::size_t j = 0; j < p.t.size(); ++j) {
      if (p.refined[j] || std::abs(p.t[j] + p.t[i]) > tol) continue;
      paired = true;
      const double a = ladder_rate(p, i), b = ladder_rate(p, j);
      if (std::isfinite(a) && std::isfinite(b)) worst = std::max(worst, std::abs(a - b));
    }
  }
  if (!paired) throw ContractError("t grid has no mirrored points");
  return worst;
}

Eigen::Matrix2cd polarization_tensor(const ResolventProblem& problem, double t, double delta) {
  const PanelMesh& m = problem.mesh();
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  CMatrix f(n, 2);
  for (Eigen::Index j = 0; j < n; ++j) {
    f(j, 0) = m.normal[static_cast<std::size_t>(j)].x;
    f(j, 1) = m.normal[static_cast<std::size_t>(j)].y;
  }
  f.col(0) = project_mean_zero(m, f.col(0));
  f.col(1) = project_mean_zero(m, f.col(1));
  CMatrix phi = problem.solve(t, delta, f);
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t k = static_cast<std::size_t>(j);
    for (int c = 0; c < 2; ++c) {
      out(0, c) += m.weight[k] * m.x[k].x * phi(j, c);
      out(1, c) += m.weight[k] * m.x[k].y * phi(j, c);
    }
  }
  return out;
}

}  // namespace npspec

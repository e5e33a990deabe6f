#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "npspec/corner_compress.hpp"

namespace npspec {

struct DipoleSource {
  int id = 0;
  Vec2 z;
  Vec2 d;  // unit
};

/// `positions` points equally spaced on the circle of radius `radius`
/// about the origin, each with `orientations` directions k pi / orientations.
/// Opposite directions give the same norms, so a half turn suffices.
std::vector<DipoleSource> source_ring(double radius, int positions, int orientations);
/// As source_ring, with orientations drawn uniformly from the half turn.
std::vector<DipoleSource> source_ring_random(double radius, int positions, int orientations, std::uint64_t seed);

/// f(x_j) = n_j . grad q(x_j) with q(x) = d.(x - z) / (2 pi |x - z|^2),
/// projected to mean zero. `raw_mean` receives |sum w f| before projection.
Density dipole_source(const PanelMesh& mesh, Vec2 z, Vec2 d, double* raw_mean = nullptr);

/// -log(norm_star) / log(delta). A zero norm returns 0 and sets `zero_norm`.
double alpha_of(double norm_star, double delta, bool* zero_norm = nullptr);

enum class SolverKind { Brute, Compressed, Both };

const char* to_string(SolverKind k);
SolverKind solver_kind_from(const std::string& name);

/// Star norms of the resolvent solutions for a batch of dipole sources.
struct DipoleBatch {
  std::vector<double> norm_star;
  /// Brute force values when the problem runs both solvers, else empty.
  std::vector<double> norm_star_brute;
  double residual = 0.0;
  double cond = 1.0;
  /// max relative difference between the two solvers (both only)
  double solver_gap = 0.0;
};

/// Discretized resolvent equation ((t + i delta) I - K*) phi = f on one
/// domain. Compressed problems work on the coarse mesh and fold the corner
/// grading into compressed blocks; brute force problems factor the fully
/// graded matrix. Running both uses truncated compression so the two
/// discretizations coincide.
class ResolventProblem {
 public:
  ResolventProblem(const BoundaryCurve& curve, const MeshConfig& cfg, SolverKind kind = SolverKind::Compressed,
                   const CompressionOptions& opts = {});

  SolverKind kind() const { return kind_; }
  const BoundaryCurve& curve() const { return *curve_; }
  const MeshConfig& mesh_config() const { return cfg_; }
  /// Mesh on which densities live: coarse for compressed and both, graded for brute.
  const PanelMesh& mesh() const;
  const PanelMesh& graded_mesh() const;
  const CompressionOptions& compression() const { return opts_; }

  /// Densities phi for every column of f (values on mesh()). For compressed
  /// problems these are the weight-corrected coarse densities: integrals of
  /// smooth functions against phi are plain quadrature sums on mesh().
  CMatrix solve(double t, double delta, const CMatrix& f, double* residual = nullptr, double* cond = nullptr) const;

  DipoleBatch dipole_norms(double t, double delta, const std::vector<DipoleSource>& sources) const;

 private:
  std::shared_ptr<const BoundaryCurve> curve_;
  MeshConfig cfg_;
  SolverKind kind_;
  CompressionOptions opts_;
  std::shared_ptr<const PanelMesh> coarse_;
  std::shared_ptr<const PanelMesh> graded_;
  RMatrix coarse_np_;
  RMatrix graded_np_;
};

struct ResolventSolution {
  Density phi;
  double residual = 0.0;
  double cond = 1.0;
};

/// Solves for one mean-zero density f given on problem.mesh().
ResolventSolution solve_resolvent(const ResolventProblem& problem, double t, double delta, const Density& f);

/// delta ||phi||_*^2 for phi = ((t + i delta) - K*)^-1 f_z from the
/// dipole potential paired with phi: Im[(lambda - 1/2) sum_j w_j q(x_j) phi_j].
double dipole_energy(const PanelMesh& mesh, cplx lambda, const DipoleSource& s, const CVector& phi);

struct SpectralSample {
  double t = 0.0;
  double delta = 0.0;
  int source_id = 0;
  double norm_star = 0.0;
  double alpha = 0.0;
  double cond = 0.0;
  bool ok = false;
  bool zero_norm = false;
};

struct CellFailure {
  double t = 0.0;
  double delta = 0.0;
  std::string message;
};

struct IndicatorProfile {
  std::vector<double> t;         // increasing
  std::vector<char> refined;     // 1 where t came from peak refinement
  std::vector<double> deltas;    // decreasing
  std::vector<DipoleSource> sources;
  /// index (ti * deltas + di) * sources + si
  std::vector<SpectralSample> samples;
  /// max over sources of alpha at the smallest delta
  std::vector<double> alpha_sharp;
  /// max over sources of the ladder slope of -log ||phi|| against log delta
  /// (log corrected at t = 0)
  std::vector<double> alpha_rate;
  std::vector<int> rate_source;  // source index attaining alpha_rate
  /// max over sources of delta ||phi||^2 at the smallest delta
  std::vector<double> mu;
  std::vector<CellFailure> failures;
  int rate_rungs = 3;

  const SpectralSample& at(std::size_t ti, std::size_t di, std::size_t si) const {
    return samples[(ti * deltas.size() + di) * sources.size() + si];
  }
  /// Grid step of the unrefined t values.
  double grid_step() const;
  std::size_t index_of(double t) const;
};

struct SweepOptions {
  int jobs = 1;
  /// Locate sharp resolvent peaks between grid points and add them to the profile.
  bool refine_peaks = true;
  /// Ladder rungs (smallest deltas) used for the rate slope; 0 uses all.
  int rate_rungs = 3;
  int max_peaks = 64;
};

IndicatorProfile sweep(const ResolventProblem& problem, const std::vector<double>& t_grid,
                       const std::vector<double>& deltas, const std::vector<DipoleSource>& sources,
                       const SweepOptions& opts = {});

/// Location of a resolvent peak near `t0` for one source, by repeated
/// parabolic interpolation of 1/||phi||^2 at the given delta.
double refine_peak(const ResolventProblem& problem, double t0, double h, double delta, const DipoleSource& source);

/// Slope of -log(norm) against log(delta) by least squares over the
/// last `rungs` entries (all when rungs <= 0). With `log_corrected` the
/// norms are first divided by |log delta|^(1/2), the growth factor that
/// accompanies the power law at t = 0 on domains with corners.
double ladder_slope(const std::vector<double>& deltas, const std::vector<double>& norms, int rungs = 0,
                    bool log_corrected = false);

struct Thresholds {
  double pure_point = 0.9;
  double continuous_lo = 0.35;
  double continuous_hi = 0.85;
  double resolvent = 0.1;
  double isolation = 0.25;
  /// cells with |t| below this many grid steps never count as eigenvalues
  double zero_window_cells = 2.0;
};

struct LadderRow {
  double delta = 0.0;
  double norm_star = 0.0;
  double alpha = 0.0;
};

struct Claim {
  double t = 0.0;
  double alpha = 0.0;
  int source_id = 0;
  std::vector<LadderRow> evidence;
};

struct Band {
  double lo = 0.0, hi = 0.0;
  std::vector<Claim> evidence;  // the two end cells
};

struct Unclassified {
  double t = 0.0;
  double alpha = 0.0;
  std::string reason;
};

struct SpectrumReport {
  std::vector<Band> bands;
  std::vector<Claim> eigenvalues;
  std::vector<Claim> embedded;
  std::vector<Unclassified> unclassified;
  std::size_t resolvent_cells = 0;
};

SpectrumReport classify(const IndicatorProfile& profile, const Thresholds& th = {});

struct MuEstimate {
  double value = 0.0;
  bool converged = false;
  int source_id = 0;
  /// delta ||phi||^2 per ladder rung
  std::vector<double> ladder;
};

/// Limit of delta ||phi||^2 as delta -> 0 at a profile t value, for the
/// source with the largest value at the smallest delta (or `source` >= 0).
MuEstimate estimate_mu(const IndicatorProfile& profile, double t, int source = -1);

/// max |a(t) - a(-t)| over mirrored grid points, a = largest full-ladder slope over sources.
double symmetry_defect(const IndicatorProfile& profile);

/// m_ij = int x_i phi^(j) with phi^(j) the resolvent solution for n . e_j.
Eigen::Matrix2cd polarization_tensor(const ResolventProblem& problem, double t, double delta);

}  // namespace npspec

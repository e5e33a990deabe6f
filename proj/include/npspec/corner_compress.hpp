#pragma once

#include <memory>
#include <vector>

#include "npspec/mesh.hpp"
#include "npspec/operators.hpp"

namespace npspec {

/// Linear fractional map R -> a + u R (I - x R)^-1 v on 64x64 corner blocks.
/// One dyadic level of a corner is such a map; composing levels stays in
/// the same class, which is what makes repeated doubling possible.
struct LevelMap {
  CMatrix a, u, v, x;
  CMatrix apply(const CMatrix& r) const;
};

/// first applied, then second
LevelMap compose(const LevelMap& first, const LevelMap& second);

struct CompressionOptions {
  enum class Tail {
    /// Grade toward the vertex until the compressed block stops changing;
    /// below the curved part the corner is continued by its tangent wedge.
    SelfSimilar,
    /// Exactly MeshConfig::corner_levels levels, matching build_mesh.
    Truncated,
  };
  Tail tail = Tail::SelfSimilar;
  double tail_tol = 1e-14;
  int max_doublings = 64;
  /// Relative deviation from the tangent wedge below which a level is
  /// treated as exactly self-similar.
  double wedge_tol = 1e-15;
  /// Reuse blocks between corners whose local geometry is congruent.
  bool reuse_congruent = true;
};

/// Data kept per explicit level for reconstructing fine densities.
struct LevelRecord {
  CMatrix r_in;     // compressed block entering this level (inner nodes)
  CMatrix x;        // X of the level map
  CMatrix e, f;     // B C^-1 and C^-1 Cb
  CMatrix c_inv;    // C^-1
  CMatrix p;        // prolongation, 96 x 64
  std::vector<char> active;  // inner nodes carried by the level below (0 = excluded)
};

struct CornerBlock {
  int corner = -1;
  std::vector<std::size_t> nodes;  // coarse node indices of the corner zone, curve order
  CMatrix r;                       // 64 x 64
  int explicit_levels = 0;         // levels built from the actual geometry
  int doublings = 0;               // self-similar tail doublings (0 when truncated)
  int reused_from = -1;            // corner whose block was copied, or -1
  /// ||R_k - R_{k-1}|| / ||R_k|| per explicit level, coarsest last.
  std::vector<double> level_updates;
  /// Relative change of the tail value per doubling.
  std::vector<double> tail_updates;
  /// Innermost first; only filled for truncated compression.
  std::vector<LevelRecord> records;
};

struct CompressedSolution {
  CMatrix rho_tilde;  // solution of (I - A° R) rho_tilde = f
  CMatrix rho_hat;    // R rho_tilde: weight-corrected density on the coarse mesh
  double residual = 0.0;  // max relative residual of the coarse system over columns
};

/// Coarse-grid resolvent system with compressed corner blocks for the
/// operator (t + i delta) I - K*.
class CompressedSystem {
 public:
  std::shared_ptr<const PanelMesh> coarse;
  cplx lambda{};
  CompressionOptions options;
  int truncated_levels = 0;
  bool include_closest_panel = true;
  std::vector<CornerBlock> corners;
  double rcond = 1.0;  // reciprocal condition estimate of the coarse system

  /// Solves for every column of f (coarse-node values).
  CompressedSolution solve(const CMatrix& f) const;
  /// Fine graded mesh matching a truncated compression.
  std::shared_ptr<const PanelMesh> fine_mesh() const;
  /// Fine density on fine_mesh() for one solution column; truncated only.
  CVector reconstruct(const CompressedSolution& sol, Eigen::Index column = 0) const;

  /// (I - A° R) D, D = lambda on nodes outside the corner zones and 1 inside
  CMatrix system_matrix;
  std::vector<char> in_zone;
  RVector col_scale;  // lu factors system_matrix * diag(col_scale)
  Eigen::PartialPivLU<CMatrix> lu;
  RMatrix coarse_np;  // K* on the coarse mesh, corner blocks intact
  MeshConfig mesh_config;
};

std::shared_ptr<const PanelMesh> coarse_mesh_for(const BoundaryCurve& curve, const MeshConfig& cfg);

CompressedSystem build_compression(const BoundaryCurve& curve, const MeshConfig& cfg, double t, double delta,
                                   const CompressionOptions& opts = {});
/// Reuses an existing coarse mesh (and its K* matrix when given).
CompressedSystem build_compression(std::shared_ptr<const PanelMesh> coarse, const MeshConfig& cfg, double t,
                                   double delta, const CompressionOptions& opts = {},
                                   const RMatrix* coarse_np = nullptr);

/// Dense solve on the fully graded mesh.
struct BruteForceSystem {
  std::shared_ptr<const PanelMesh> mesh;
  cplx lambda{};
  Eigen::PartialPivLU<CMatrix> lu;
  RMatrix np;
  double rcond = 1.0;

  CMatrix solve(const CMatrix& f, double* residual = nullptr) const;
};

BruteForceSystem build_brute_force(std::shared_ptr<const PanelMesh> fine, double t, double delta,
                                   const RMatrix* np = nullptr);
Density solve_brute_force(const BruteForceSystem& sys, const CVector& f, double* residual = nullptr);

/// Systems this close to singular are refused.
constexpr double kSingularRcond = 1e-15;

}  // namespace npspec

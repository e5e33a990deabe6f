#pragma once

#include <vector>

#include "npspec/linalg.hpp"

#include "npspec/mesh.hpp"

namespace npspec {

using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Nystrom matrix of K*: a(j, k) ~ K*(x_j, x_k) w_k. `mesh` is not owned.
struct NpMatrix {
  RMatrix a;
  const PanelMesh* mesh = nullptr;
};

/// Nystrom matrix of the single layer operator with product-integrated
/// self and neighbour blocks. `mesh` is not owned.
struct SlpMatrix {
  RMatrix s;
  const PanelMesh* mesh = nullptr;
};

/// Complex density sampled at the mesh nodes.
struct Density {
  CVector values;
  const PanelMesh* mesh = nullptr;
};

NpMatrix assemble_np(const PanelMesh& mesh);

/// Rows [row_begin, row_end) of the K* matrix; used by the corner solver.
void assemble_np_rows(const PanelMesh& mesh, std::size_t row_begin, std::size_t row_end, RMatrix& out);

/// Double layer Nystrom matrix W^-1 A^T W.
RMatrix double_layer_from(const NpMatrix& np);

SlpMatrix assemble_slp(const PanelMesh& mesh);

/// sum_j w_j phi_j
cplx weighted_mean_numerator(const PanelMesh& mesh, const CVector& phi);
/// phi - (sum w phi / sum w); `warned` is set when the input mean was not negligible.
CVector project_mean_zero(const PanelMesh& mesh, const CVector& phi, bool* warned = nullptr);

/// -sum_j w_j phi_j conj((S psi)_j) after projecting both to mean zero.
cplx star_inner(const Density& phi, const Density& psi, const SlpMatrix& s);
double star_norm(const Density& phi, const SlpMatrix& s);

/// Weighted 2-norm of (S A - K S) on the mean-zero trigonometric densities
/// of degree <= modes in normalized arclength. Grid-scale densities are
/// excluded: the Nystrom matrices do not resolve them. modes = 0 picks
/// min(16, panel count).
double plemelj_defect(const NpMatrix& k, const SlpMatrix& s, int modes = 0);

/// Nontrivial eigenvalues sorted by decreasing magnitude; the eigenvalue
/// closest to 1/2 (constant mode) is removed. count <= 0 returns all.
std::vector<double> np_eigenvalues(const NpMatrix& k, int count = 0, double imag_tol = 1e-10);

}  // namespace npspec

#pragma once

#include <vector>

#include "npspec/types.hpp"

// Closed-form reference values. Nothing here depends on the numerical solver.
namespace npspec::oracle {

/// +-(1/2) ((r - 1) / (r + 1))^n for n = 1..n_max, ordered +l1, -l1, +l2, -l2, ...
std::vector<double> ellipse_eigenvalues(double r, int n_max);

struct Diag2 {
  cplx m11, m22;
};

/// Polarization tensor of the ellipse x^2/a^2 + y^2/b^2 = 1 for the
/// resolvent equation (lambda - K*) phi = n . e_j. Throws PoleError at
/// lambda = +-(a - b) / (2 (a + b)).
Diag2 ellipse_pt(cplx lambda, double a, double b);

struct BipolarPoint {
  double psi1 = 0.0, psi2 = 0.0;
};

/// Principal Log((z + c) / (z - c)).
BipolarPoint bipolar(Vec2 z, double c);

/// Resonance-rate indicator of the union of two disks of radius a with
/// exterior corner half-angle theta0, for a dipole at z.
double alpha_disks_analytic(double t, Vec2 z, double a, double theta0);

/// (1/2)(1 - theta / pi) for an interior corner angle theta.
double corner_bound(double interior_angle);

}  // namespace npspec::oracle

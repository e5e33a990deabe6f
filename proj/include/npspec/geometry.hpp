#pragma once

#include <memory>
#include <string>
#include <vector>

#include "npspec/types.hpp"

namespace npspec {

/// A regular parametrized curve piece gamma: [0,1] -> R^2.
///
/// Besides point and derivative evaluation, an arc reports displacements
/// measured from either endpoint. Corner grading places nodes at parameter
/// distances far below the resolution of absolute coordinates, so those
/// displacements are what the mesh stores near a vertex. Subclasses with a
/// closed form override them to stay accurate for tiny offsets.
class SmoothArc {
 public:
  virtual ~SmoothArc() = default;

  virtual Vec2 point(double s) const = 0;
  virtual Vec2 d1(double s) const = 0;
  virtual Vec2 d2(double s) const = 0;

  /// gamma(u) - gamma(0).
  virtual Vec2 offset_from_start(double u) const { return point(u) - point(0.0); }
  /// gamma(1 - u) - gamma(1).
  virtual Vec2 offset_from_end(double u) const { return point(1.0 - u) - point(1.0); }

  /// True when |gamma'| is constant (lines, circles).
  virtual bool analytic_speed() const { return false; }

  virtual std::string kind() const = 0;

  double speed(double s) const { return norm(d1(s)); }
  /// Signed curvature, positive where a counterclockwise curve turns left.
  double curvature(double s) const;
  /// Arclength by adaptive Gauss-Legendre.
  double length() const;
};

using ArcPtr = std::shared_ptr<const SmoothArc>;

class LineArc final : public SmoothArc {
 public:
  LineArc(Vec2 p0, Vec2 p1) : p0_(p0), p1_(p1) {}
  Vec2 point(double s) const override { return p0_ + (p1_ - p0_) * s; }
  Vec2 d1(double) const override { return p1_ - p0_; }
  Vec2 d2(double) const override { return {0.0, 0.0}; }
  Vec2 offset_from_start(double u) const override { return (p1_ - p0_) * u; }
  Vec2 offset_from_end(double u) const override { return (p0_ - p1_) * u; }
  bool analytic_speed() const override { return true; }
  std::string kind() const override { return "line"; }

 private:
  Vec2 p0_, p1_;
};

/// Circular arc from angle t0 to t1 (counterclockwise when t1 > t0).
class CircleArc final : public SmoothArc {
 public:
  CircleArc(Vec2 center, double radius, double t0, double t1)
      : c_(center), r_(radius), t0_(t0), t1_(t1) {}
  Vec2 point(double s) const override;
  Vec2 d1(double s) const override;
  Vec2 d2(double s) const override;
  Vec2 offset_from_start(double u) const override;
  Vec2 offset_from_end(double u) const override;
  bool analytic_speed() const override { return true; }
  std::string kind() const override { return "circle"; }

 private:
  Vec2 chord(double theta, double dtheta) const;
  Vec2 c_;
  double r_, t0_, t1_;
};

/// Axis-aligned ellipse (a cos t, b sin t) for t in [t0, t1].
class EllipseArc final : public SmoothArc {
 public:
  EllipseArc(double a, double b, double t0, double t1) : a_(a), b_(b), t0_(t0), t1_(t1) {}
  Vec2 point(double s) const override;
  Vec2 d1(double s) const override;
  Vec2 d2(double s) const override;
  std::string kind() const override { return "ellipse"; }

 private:
  double a_, b_, t0_, t1_;
};

/// One eighth of the superellipse |x/r|^k + |y|^k = 1, written as a graph.
/// With graph_over_y the piece is x = r (1 - y^k)^(1/k), y running between
/// y0 and y1; otherwise y = (1 - (x/r)^k)^(1/k) with x between x0 and x1.
/// Signs mirror the first-quadrant graph into the other quadrants.
class SuperellipseArc final : public SmoothArc {
 public:
  SuperellipseArc(double r, double k, bool graph_over_y, double v0, double v1, double sx,
                  double sy);
  Vec2 point(double s) const override;
  Vec2 d1(double s) const override;
  Vec2 d2(double s) const override;
  std::string kind() const override { return "superellipse"; }

 private:
  // h(v) = (1 - v^k)^(1/k) with first and second derivatives.
  void graph(double v, double& h, double& dh, double& ddh) const;
  double r_, k_;
  bool over_y_;
  double v0_, v1_, sx_, sy_;
};

/// Quintic Hermite blend matching position, first and second derivative at
/// both ends.
class QuinticArc final : public SmoothArc {
 public:
  QuinticArc(Vec2 p0, Vec2 m0, Vec2 a0, Vec2 p1, Vec2 m1, Vec2 a1);
  Vec2 point(double s) const override;
  Vec2 d1(double s) const override;
  Vec2 d2(double s) const override;
  std::string kind() const override { return "quintic"; }

 private:
  Vec2 c_[6];  // monomial coefficients
};

/// Similarity transform x -> scale * R(angle) x + shift applied to an arc.
class TransformedArc final : public SmoothArc {
 public:
  TransformedArc(ArcPtr base, double angle, double scale, Vec2 shift);
  Vec2 point(double s) const override { return apply(base_->point(s)) + shift_; }
  Vec2 d1(double s) const override { return apply(base_->d1(s)); }
  Vec2 d2(double s) const override { return apply(base_->d2(s)); }
  Vec2 offset_from_start(double u) const override { return apply(base_->offset_from_start(u)); }
  Vec2 offset_from_end(double u) const override { return apply(base_->offset_from_end(u)); }
  bool analytic_speed() const override { return base_->analytic_speed(); }
  std::string kind() const override { return base_->kind(); }

 private:
  Vec2 apply(Vec2 v) const { return Vec2{c_ * v.x - s_ * v.y, s_ * v.x + c_ * v.y} * scale_; }
  ArcPtr base_;
  double c_, s_, scale_;
  Vec2 shift_;
};

/// A corner sits at the junction where arc `arc_index` ends and the next
/// arc (cyclically) begins.
struct CornerInfo {
  Vec2 vertex;
  double interior_angle = kPi;  // radians, measured inside the domain
  std::size_t arc_index = 0;
};

/// Closed, positively oriented, piecewise smooth boundary curve.
class BoundaryCurve {
 public:
  BoundaryCurve() = default;
  /// Validates closure, regularity, corner placement and corner angles.
  /// Junctions not listed in `corners` must be tangent-continuous.
  BoundaryCurve(std::vector<ArcPtr> arcs, std::vector<CornerInfo> corners, std::string name = {});

  const std::vector<ArcPtr>& arcs() const { return arcs_; }
  const std::vector<CornerInfo>& corners() const { return corners_; }
  const std::string& name() const { return name_; }
  std::size_t arc_count() const { return arcs_.size(); }

  /// Index into corners() of the corner at the end of arc i, or -1.
  int corner_at_end(std::size_t arc) const;
  /// Index into corners() of the corner at the start of arc i, or -1.
  int corner_at_start(std::size_t arc) const;

  double perimeter() const;
  /// Enclosed area by Gauss-Legendre quadrature of (x y' - y x')/2.
  double area() const;
  /// Integral of curvature plus the corner turning angles.
  double total_turning() const;
  /// Largest distance of the curve from the origin (sampled).
  double max_radius() const;
  /// Winding-number test; points within `tol` of the curve count as inside.
  bool contains(Vec2 p, double tol = 0.0) const;
  double distance_to(Vec2 p) const;

  BoundaryCurve transformed(double angle, double scale, Vec2 shift) const;

  /// Samples the curve into a polyline and checks for self-intersection.
  bool is_simple(int samples_per_arc = 256) const;

 private:
  std::vector<ArcPtr> arcs_;
  std::vector<CornerInfo> corners_;
  std::string name_;
};

BoundaryCurve make_ellipse(double a, double b);
BoundaryCurve make_superellipse(double r, double k);
/// Unit-area rectangle with sides sqrt(r) by 1/sqrt(r); r < 1 swaps the axes.
BoundaryCurve make_rectangle(double r);
/// Base s1, legs s2, base on the x-axis centered at the origin.
BoundaryCurve make_isosceles_triangle(double s1, double s2);
/// Union of two disks of radius a centred at (0, +-a cos t0), meeting at
/// (+-a sin t0, 0) with exterior corner angle 2 t0.
BoundaryCurve make_intersecting_disks(double a, double theta0);
/// Ellipse with semi-axes (r, 1) whose rightmost point is replaced by an
/// outward vertex of interior angle theta_c; w is the half-width of the
/// replaced parameter window as a fraction of the full turn. With r < 1 the
/// vertex sits on the minor axis.
BoundaryCurve make_perturbed_ellipse(double r, double theta_c, double w);

/// (1/2) max_j |1 - theta_j / pi| over corners; 0 for smooth curves.
double essential_bound(const BoundaryCurve& curve);

}  // namespace npspec

#include "npspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "npspec/quadrature.hpp"

namespace npspec {

double SmoothArc::curvature(double s) const {
  Vec2 a = d1(s), b = d2(s);
  double sp = norm(a);
  return cross(a, b) / (sp * sp * sp);
}

double SmoothArc::length() const {
  return integrate_adaptive([this](double s) { return speed(s); }, 0.0, 1.0, 1e-15);
}

// ---------------------------------------------------------------------------

Vec2 CircleArc::point(double s) const {
  double t = t0_ + (t1_ - t0_) * s;
  return c_ + Vec2{std::cos(t), std::sin(t)} * r_;
}

Vec2 CircleArc::d1(double s) const {
  double t = t0_ + (t1_ - t0_) * s, dt = t1_ - t0_;
  return Vec2{-std::sin(t), std::cos(t)} * (r_ * dt);
}

Vec2 CircleArc::d2(double s) const {
  double t = t0_ + (t1_ - t0_) * s, dt = t1_ - t0_;
  return Vec2{std::cos(t), std::sin(t)} * (-r_ * dt * dt);
}

// point(theta + alpha) - point(theta) without cancellation.
Vec2 CircleArc::chord(double theta, double alpha) const {
  double sh = std::sin(0.5 * alpha);
  double m = theta + 0.5 * alpha;
  return Vec2{-2.0 * std::sin(m) * sh, 2.0 * std::cos(m) * sh} * r_;
}

Vec2 CircleArc::offset_from_start(double u) const { return chord(t0_, (t1_ - t0_) * u); }
Vec2 CircleArc::offset_from_end(double u) const { return chord(t1_, -(t1_ - t0_) * u); }

// ---------------------------------------------------------------------------

Vec2 EllipseArc::point(double s) const {
  double t = t0_ + (t1_ - t0_) * s;
  return {a_ * std::cos(t), b_ * std::sin(t)};
}

Vec2 EllipseArc::d1(double s) const {
  double t = t0_ + (t1_ - t0_) * s, dt = t1_ - t0_;
  return Vec2{-a_ * std::sin(t), b_ * std::cos(t)} * dt;
}

Vec2 EllipseArc::d2(double s) const {
  double t = t0_ + (t1_ - t0_) * s, dt = t1_ - t0_;
  return Vec2{-a_ * std::cos(t), -b_ * std::sin(t)} * (dt * dt);
}

// ---------------------------------------------------------------------------

SuperellipseArc::SuperellipseArc(double r, double k, bool graph_over_y, double v0, double v1,
                                 double sx, double sy)
    : r_(r), k_(k), over_y_(graph_over_y), v0_(v0), v1_(v1), sx_(sx), sy_(sy) {}

void SuperellipseArc::graph(double v, double& h, double& dh, double& ddh) const {
  double vk = std::pow(v, k_);
  double g = 1.0 - vk;
  h = std::pow(g, 1.0 / k_);
  dh = -std::pow(v, k_ - 1.0) * std::pow(g, 1.0 / k_ - 1.0);
  ddh = -(k_ - 1.0) * std::pow(v, k_ - 2.0) * std::pow(g, 1.0 / k_ - 2.0);
}

Vec2 SuperellipseArc::point(double s) const {
  double v = v0_ + (v1_ - v0_) * s, h, dh, ddh;
  if (over_y_) {
    graph(v, h, dh, ddh);
    return {sx_ * r_ * h, sy_ * v};
  }
  graph(v / r_, h, dh, ddh);
  return {sx_ * v, sy_ * h};
}

Vec2 SuperellipseArc::d1(double s) const {
  double v = v0_ + (v1_ - v0_) * s, dv = v1_ - v0_, h, dh, ddh;
  if (over_y_) {
    graph(v, h, dh, ddh);
    return Vec2{sx_ * r_ * dh, sy_} * dv;
  }
  graph(v / r_, h, dh, ddh);
  return Vec2{sx_, sy_ * dh / r_} * dv;
}

Vec2 SuperellipseArc::d2(double s) const {
  double v = v0_ + (v1_ - v0_) * s, dv = v1_ - v0_, h, dh, ddh;
  if (over_y_) {
    graph(v, h, dh, ddh);
    return Vec2{sx_ * r_ * ddh, 0.0} * (dv * dv);
  }
  graph(v / r_, h, dh, ddh);
  return Vec2{0.0, sy_ * ddh / (r_ * r_)} * (dv * dv);
}

// ---------------------------------------------------------------------------

QuinticArc::QuinticArc(Vec2 p0, Vec2 m0, Vec2 a0, Vec2 p1, Vec2 m1, Vec2 a1) {
  // Hermite basis expanded into monomials u^0..u^5.
  c_[0] = p0;
  c_[1] = m0;
  c_[2] = a0 * 0.5;
  c_[3] = (p1 - p0) * 10.0 - m0 * 6.0 - m1 * 4.0 - a0 * 1.5 + a1 * 0.5;
  c_[4] = (p0 - p1) * 15.0 + m0 * 8.0 + m1 * 7.0 + a0 * 1.5 - a1;
  c_[5] = (p1 - p0) * 6.0 - (m0 + m1) * 3.0 - a0 * 0.5 + a1 * 0.5;
}

Vec2 QuinticArc::point(double u) const {
  Vec2 r = c_[5];
  for (int i = 4; i >= 0; --i) r = r * u + c_[i];
  return r;
}

Vec2 QuinticArc::d1(double u) const {
  Vec2 r = c_[5] * 5.0;
  for (int i = 4; i >= 1; --i) r = r * u + c_[i] * static_cast<double>(i);
  return r;
}

Vec2 QuinticArc::d2(double u) const {
  Vec2 r = c_[5] * 20.0;
  for (int i = 4; i >= 2; --i) r = r * u + c_[i] * static_cast<double>(i * (i - 1));
  return r;
}

// ---------------------------------------------------------------------------

TransformedArc::TransformedArc(ArcPtr base, double angle, double scale, Vec2 shift)
    : base_(std::move(base)), c_(std::cos(angle)), s_(std::sin(angle)), scale_(scale), shift_(shift) {}

// ---------------------------------------------------------------------------

namespace {

double turning_angle(Vec2 tin, Vec2 tout) { return std::atan2(cross(tin, tout), dot(tin, tout)); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

std::vector<Vec2> polyline(const std::vector<ArcPtr>& arcs, int per_arc) {
  std::vector<Vec2> pts;
  for (const auto& a : arcs)
    for (int i = 0; i < per_arc; ++i) pts.push_back(a->point(static_cast<double>(i) / per_arc));
  return pts;
}

}  // namespace

BoundaryCurve::BoundaryCurve(std::vector<ArcPtr> arcs, std::vector<CornerInfo> corners, std::string name)
    : arcs_(std::move(arcs)), corners_(std::move(corners)), name_(std::move(name)) {
  if (arcs_.empty()) throw InvalidGeometry("boundary curve has no arcs");
  const std::size_t n = arcs_.size();
  double scale = 1.0;
  for (const auto& a : arcs_) scale = std::max(scale, norm(a->point(0.0)));
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 e = arcs_[k]->point(1.0), s = arcs_[(k + 1) % n]->point(0.0);
    if (norm(e - s) > 1e-12 * scale) {
      std::ostringstream os;
      os << "arcs " << k << " and " << (k + 1) % n << " do not join (gap " << norm(e - s) << ")";
      throw InvalidGeometry(os.str());
    }
    for (int i = 0; i <= 16; ++i)
      if (!(arcs_[k]->speed(i / 16.0) > 0.0)) throw InvalidGeometry("arc parametrization is not regular");
  }
  std::vector<int> corner_of(n, -1);
  for (std::size_t c = 0; c < corners_.size(); ++c) {
    auto& ci = corners_[c];
    if (ci.arc_index >= n) throw InvalidGeometry("corner arc index out of range");
    if (corner_of[ci.arc_index] >= 0) throw InvalidGeometry("two corners at one junction");
    corner_of[ci.arc_index] = static_cast<int>(c);
    Vec2 v = arcs_[ci.arc_index]->point(1.0);
    if (norm(v - ci.vertex) > 1e-12 * scale) throw InvalidGeometry("corner is not at an arc junction");
    double th = ci.interior_angle;
    if (!(th > 0.0 && th < 2.0 * kPi) || std::abs(th - kPi) < 1e-12)
      throw InvalidGeometry("corner interior angle must lie in (0, 2pi) minus {pi}");
    Vec2 tin = normalized(arcs_[ci.arc_index]->d1(1.0));
    Vec2 tout = normalized(arcs_[(ci.arc_index + 1) % n]->d1(0.0));
    double from_tangents = kPi - turning_angle(tin, tout);
    if (std::abs(from_tangents - th) > 1e-10) throw InvalidGeometry("corner angle disagrees with arc tangents");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (corner_of[k] >= 0) continue;
    Vec2 tin = normalized(arcs_[k]->d1(1.0)), tout = normalized(arcs_[(k + 1) % n]->d1(0.0));
    if (std::abs(turning_angle(tin, tout)) > 1e-8)
      throw InvalidGeometry("tangent jump at a junction not declared as corner");
  }
  if (total_turning() < 0.0) throw InvalidGeometry("curve must be positively oriented");
  if (!is_simple()) throw InvalidGeometry("curve self-intersects");
}

int BoundaryCurve::corner_at_end(std::size_t arc) const {
  for (std::size_t c = 0; c < corners_.size(); ++c)
    if (corners_[c].arc_index == arc) return static_cast<int>(c);
  return -1;
}

int BoundaryCurve::corner_at_start(std::size_t arc) const {
  return corner_at_end((arc + arcs_.size() - 1) % arcs_.size());
}

double BoundaryCurve::perimeter() const {
  double p = 0.0;
  for (const auto& a : arcs_) p += a->length();
  return p;
}

double BoundaryCurve::area() const {
  double s = 0.0;
  for (const auto& a : arcs_)
    s += integrate_adaptive([&](double t) { return 0.5 * cross(a->point(t), a->d1(t)); }, 0.0, 1.0, 1e-15);
  return s;
}

double BoundaryCurve::total_turning() const {
  double s = 0.0;
  for (const auto& a : arcs_)
    s += integrate_adaptive([&](double t) { return a->curvature(t) * a->speed(t); }, 0.0, 1.0, 1e-15);
  for (const auto& c : corners_) s += kPi - c.interior_angle;
  return s;
}

double BoundaryCurve::max_radius() const {
  double r = 0.0;
  for (auto p : polyline(arcs_, 512)) r = std::max(r, norm(p));
  return r;
}

bool BoundaryCurve::contains(Vec2 p, double tol) const {
  if (tol > 0.0 && distance_to(p) <= tol) return true;
  auto pts = polyline(arcs_, 512);
  double wind = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec2 a = pts[i] - p, b = pts[(i + 1) % pts.size()] - p;
    wind += std::atan2(cross(a, b), dot(a, b));
  }
  return std::abs(wind) > kPi;
}

double BoundaryCurve::distance_to(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : arcs_) {
    const int m = 2048;
    int arg = 0;
    for (int i = 0; i <= m; ++i) {
      double d = norm(a->point(static_cast<double>(i) / m) - p);
      if (d < best) best = d, arg = i;
    }
    // golden-section polish around the best sample of this arc
    double lo = std::max(0.0, (arg - 1.0) / m), hi = std::min(1.0, (arg + 1.0) / m);
    for (int it = 0; it < 60; ++it) {
      double m1 = lo + 0.381966 * (hi - lo), m2 = hi - 0.381966 * (hi - lo);
      if (norm(a->point(m1) - p) < norm(a->point(m2) - p)) hi = m2; else lo = m1;
    }
    best = std::min(best, norm(a->point(0.5 * (lo + hi)) - p));
  }
  return best;
}

BoundaryCurve BoundaryCurve::transformed(double angle, double scale, Vec2 shift) const {
  std::vector<ArcPtr> arcs;
  for (const auto& a : arcs_) arcs.push_back(std::make_shared<TransformedArc>(a, angle, scale, shift));
  std::vector<CornerInfo> corners = corners_;
  double c = std::cos(angle), s = std::sin(angle);
  for (auto& ci : corners) {
    Vec2 v = ci.vertex;
    ci.vertex = Vec2{c * v.x - s * v.y, s * v.x + c * v.y} * scale + shift;
  }
  return BoundaryCurve(std::move(arcs), std::move(corners), name_);
}

bool BoundaryCurve::is_simple(int samples_per_arc) const {
  auto pts = polyline(arcs_, samples_per_arc);
  const std::size_t m = pts.size();
  for (std::size_t i = 0; i < m; ++i) {
    Vec2 a = pts[i], b = pts[(i + 1) % m];
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % m])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generators

BoundaryCurve make_ellipse(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidGeometry("ellipse axes must be positive");
  if (a < b) throw InvalidGeometry("ellipse requires a >= b");
  return BoundaryCurve({std::make_shared<EllipseArc>(a, b, 0.0, 2.0 * kPi)}, {}, "ellipse");
}

BoundaryCurve make_superellipse(double r, double k) {
  if (!(k >= 2.0)) throw InvalidGeometry("superellipse exponent must be >= 2");
  if (!(r >= 1.0)) throw InvalidGeometry("superellipse aspect ratio must be >= 1");
  const double yd = std::pow(2.0, -1.0 / k), xd = r * yd;
  std::vector<ArcPtr> arcs = {
      std::make_shared<SuperellipseArc>(r, k, true, 0.0, yd, 1.0, 1.0),
      std::make_shared<SuperellipseArc>(r, k, false, xd, 0.0, 1.0, 1.0),
      std::make_shared<SuperellipseArc>(r, k, false, 0.0, xd, -1.0, 1.0),
      std::make_shared<SuperellipseArc>(r, k, true, yd, 0.0, -1.0, 1.0),
      std::make_shared<SuperellipseArc>(r, k, true, 0.0, yd, -1.0, -1.0),
      std::make_shared<SuperellipseArc>(r, k, false, xd, 0.0, -1.0, -1.0),
      std::make_shared<SuperellipseArc>(r, k, false, 0.0, xd, 1.0, -1.0),
      std::make_shared<SuperellipseArc>(r, k, true, yd, 0.0, 1.0, -1.0),
  };
  return BoundaryCurve(std::move(arcs), {}, "superellipse");
}

BoundaryCurve make_rectangle(double r) {
  if (!(r > 0.0)) throw InvalidGeometry("rectangle aspect ratio must be positive");
  // r < 1 gives the same rectangle rotated by 90 degrees; sides sqrt(r) x 1/sqrt(r) cover both.
  const double w = std::sqrt(r), h = 1.0 / std::sqrt(r);
  Vec2 p[4] = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
  std::vector<ArcPtr> arcs;
  std::vector<CornerInfo> corners;
  for (int i = 0; i < 4; ++i) {
    arcs.push_back(std::make_shared<LineArc>(p[i], p[(i + 1) % 4]));
    corners.push_back({p[(i + 1) % 4], kPi / 2, static_cast<std::size_t>(i)});
  }
  return BoundaryCurve(std::move(arcs), std::move(corners), "rectangle");
}

BoundaryCurve make_isosceles_triangle(double s1, double s2) {
  if (!(s1 > 0.0 && s2 > 0.0) || !(2.0 * s2 > s1)) throw InvalidGeometry("degenerate triangle");
  const double hgt = std::sqrt(s2 * s2 - 0.25 * s1 * s1);
  const double apex = std::acos((2.0 * s2 * s2 - s1 * s1) / (2.0 * s2 * s2));
  const double base = 0.5 * (kPi - apex);
  Vec2 a{-0.5 * s1, 0.0}, b{0.5 * s1, 0.0}, c{0.0, hgt};
  std::vector<ArcPtr> arcs = {std::make_shared<LineArc>(a, b), std::make_shared<LineArc>(b, c),
                              std::make_shared<LineArc>(c, a)};
  std::vector<CornerInfo> corners = {{b, base, 0}, {c, apex, 1}, {a, base, 2}};
  return BoundaryCurve(std::move(arcs), std::move(corners), "triangle");
}

BoundaryCurve make_intersecting_disks(double a, double theta0) {
  if (!(a > 0.0)) throw InvalidGeometry("disk radius must be positive");
  if (!(theta0 > 0.0 && theta0 < kPi / 2)) throw InvalidGeometry("theta0 must lie in (0, pi/2)");
  const double c = a * std::sin(theta0), h = a * std::cos(theta0);
  std::vector<ArcPtr> arcs = {
      std::make_shared<CircleArc>(Vec2{0.0, h}, a, theta0 - kPi / 2, 1.5 * kPi - theta0),
      std::make_shared<CircleArc>(Vec2{0.0, -h}, a, kPi / 2 + theta0, 2.5 * kPi - theta0),
  };
  const double interior = 2.0 * kPi - 2.0 * theta0;
  std::vector<CornerInfo> corners = {{Vec2{-c, 0.0}, interior, 0}, {Vec2{c, 0.0}, interior, 1}};
  return BoundaryCurve(std::move(arcs), std::move(corners), "intersecting_disks");
}

BoundaryCurve make_perturbed_ellipse(double r, double theta_c, double w) {
  if (!(r > 0.0)) throw InvalidGeometry("perturbed ellipse aspect ratio must be positive");
  if (!(theta_c > 0.0 && theta_c < kPi)) throw InvalidGeometry("corner angle must lie in (0, pi)");
  if (!(w > 0.0 && w < 0.2)) throw InvalidGeometry("perturbation width must lie in (0, 0.2)");
  const double a = r, b = 1.0, tw = 2.0 * kPi * w;
  auto ell = [&](double t) { return Vec2{a * std::cos(t), b * std::sin(t)}; };
  auto ell_t = [&](double t) { return Vec2{-a * std::sin(t), b * std::cos(t)}; };
  auto ell_k = [&](double t) {
    double sp = norm(ell_t(t));
    return a * b / (sp * sp * sp);
  };
  const Vec2 e_up = ell(tw), e_dn = ell(-tw);
  const double half = 0.5 * theta_c;
  // The upper leg leaves the vertex along (-cos, sin)(theta_c/2) and passes through e_up.
  const Vec2 v{e_up.x + e_up.y / std::tan(half), 0.0};
  const Vec2 dir_up{-std::cos(half), std::sin(half)}, dir_dn{-std::cos(half), -std::sin(half)};
  const double leg = norm(e_up - v);
  const Vec2 p_up = v + dir_up * (0.5 * leg), p_dn = v + dir_dn * (0.5 * leg);
  const double L = 0.5 * leg;

  Vec2 tu = normalized(ell_t(tw)), td = normalized(ell_t(-tw));
  Vec2 au = rot_ccw(tu) * (ell_k(tw) * L * L), ad = rot_ccw(td) * (ell_k(-tw) * L * L);

  std::vector<ArcPtr> arcs = {
      std::make_shared<LineArc>(v, p_up),
      std::make_shared<QuinticArc>(p_up, dir_up * L, Vec2{}, e_up, tu * L, au),
      std::make_shared<EllipseArc>(a, b, tw, 2.0 * kPi - tw),
      std::make_shared<QuinticArc>(e_dn, td * L, ad, p_dn, -dir_dn * L, Vec2{}),
      std::make_shared<LineArc>(p_dn, v),
  };
  std::vector<CornerInfo> corners = {{v, theta_c, 4}};
  return BoundaryCurve(std::move(arcs), std::move(corners), "perturbed_ellipse");
}

double essential_bound(const BoundaryCurve& curve) {
  double b = 0.0;
  for (const auto& c : curve.corners()) b = std::max(b, 0.5 * std::abs(1.0 - c.interior_angle / kPi));
  return b;
}

}  // namespace npspec

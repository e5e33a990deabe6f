#include "npspec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "npspec/quadrature.hpp"
#include "npspec/simd/kernels.hpp"

namespace npspec {

namespace {

// Source coordinates relative to a corner vertex; nodes anchored at that
// corner use their exact local offsets.
struct ShiftedSources {
  std::vector<double> sx, sy;
};

ShiftedSources shifted_sources(const PanelMesh& m, int corner) {
  ShiftedSources s;
  const std::size_t n = m.size();
  s.sx.resize(n);
  s.sy.resize(n);
  Vec2 v = corner >= 0 ? m.curve->corners()[corner].vertex : Vec2{};
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 p = (corner >= 0 && m.anchor[k] == corner) ? m.local[k] : m.x[k] - v;
    s.sx[k] = p.x;
    s.sy[k] = p.y;
  }
  return s;
}

}  // namespace

void assemble_np_rows(const PanelMesh& mesh, std::size_t row_begin, std::size_t row_end, RMatrix& out) {
  const std::size_t n = mesh.size();
  if (row_end > n || row_begin > row_end) throw AssemblyError("assemble_np_rows: bad row range");
  out.resize(static_cast<Eigen::Index>(row_end - row_begin), static_cast<Eigen::Index>(n));
  const std::size_t nc = mesh.curve->corners().size();
  std::vector<ShiftedSources> shifted(nc + 1);
  std::vector<bool> built(nc + 1, false);
  std::vector<double> row(n);
  for (std::size_t j = row_begin; j < row_end; ++j) {
    int c = mesh.anchor[j];
    std::size_t slot = c >= 0 ? static_cast<std::size_t>(c) : nc;
    if (!built[slot]) {
      shifted[slot] = shifted_sources(mesh, c);
      built[slot] = true;
    }
    Vec2 t = c >= 0 ? mesh.local[j] : mesh.x[j];
    simd::NpRowArgs args{t.x, t.y, mesh.normal[j].x, mesh.normal[j].y, shifted[slot].sx.data(),
                         shifted[slot].sy.data(), mesh.weight.data(), n, row.data()};
    simd::np_row(args);
    row[j] = mesh.curvature[j] * mesh.weight[j] / (4.0 * kPi);
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(row[k])) throw AssemblyError("assemble_np: coincident nodes");
      out(static_cast<Eigen::Index>(j - row_begin), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
}

NpMatrix assemble_np(const PanelMesh& mesh) {
  NpMatrix m;
  m.mesh = &mesh;
  assemble_np_rows(mesh, 0, mesh.size(), m.a);
  return m;
}

RMatrix double_layer_from(const NpMatrix& np) {
  const auto& w = np.mesh->weight;
  const Eigen::Index n = np.a.rows();
  RMatrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index m = 0; m < n; ++m) k(j, m) = np.a(m, j) * w[m] / w[j];
  return k;
}

// ---------------------------------------------------------------------------
// Single layer

namespace {

struct PanelSampler {
  const PanelMesh& m;
  // Position of the point at reference coordinate xi on panel p, relative to
  // the panel's anchor vertex when it has one, and the length element.
  Vec2 local_point(std::size_t p, double xi, double& jac) const {
    const Panel& pn = m.panels[p];
    const SmoothArc& arc = *m.curve->arcs()[pn.arc];
    if (pn.corner >= 0) {
      double d = 0.5 * (pn.d0 + pn.d1) + 0.5 * (pn.d1 - pn.d0) * xi;
      double s = pn.side < 0 ? 1.0 - d : d;
      jac = 0.5 * std::abs(pn.d1 - pn.d0) * arc.speed(s);
      return pn.side < 0 ? arc.offset_from_end(d) : arc.offset_from_start(d);
    }
    double s = 0.5 * (pn.s0 + pn.s1) + 0.5 * (pn.s1 - pn.s0) * xi;
    jac = 0.5 * (pn.s1 - pn.s0) * arc.speed(s);
    return arc.point(s);
  }
  Vec2 target_minus(std::size_t j, std::size_t p, Vec2 y) const {
    int c = m.panels[p].corner;
    if (c >= 0 && m.anchor[j] == c) return m.local[j] - y;
    if (c >= 0) return m.x[j] - (m.curve->corners()[c].vertex + y);
    return m.x[j] - y;
  }
};

// (1/2pi) int_panel log|x_j - y| l_i(y) dsigma(y), composite Gauss-Legendre
// graded geometrically toward the reference coordinate xs.
void product_weights(const PanelSampler& ps, std::size_t j, std::size_t p, double xs, std::span<double> out) {
  const GaussRule& g = gauss_legendre_cached(ps.m.nodes_per_panel);
  const GaussRule& q = gauss_legendre_cached(16);
  static thread_local std::vector<double> bary, basis;
  bary = barycentric_weights(g.nodes);
  basis.resize(g.nodes.size());
  std::fill(out.begin(), out.end(), 0.0);
  auto interval = [&](double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      double xi = mid + half * q.nodes[i];
      double jac;
      Vec2 y = ps.local_point(p, xi, jac);
      double r = norm(ps.target_minus(j, p, y));
      double f = q.weights[i] * half * jac * std::log(r) / (2.0 * kPi);
      lagrange_basis(g.nodes, bary, xi, basis);
      for (std::size_t k = 0; k < basis.size(); ++k) out[k] += f * basis[k];
    }
  };
  // Smallest useful offset in xi: below it the parameter itself no longer
  // resolves distinct points.
  const Panel& pn = ps.m.panels[p];
  double pmid, phalf;
  if (pn.corner >= 0) {
    pmid = 0.5 * (pn.d0 + pn.d1), phalf = 0.5 * std::abs(pn.d1 - pn.d0);
  } else {
    pmid = 0.5 * (pn.s0 + pn.s1), phalf = 0.5 * (pn.s1 - pn.s0);
  }
  const double min_width =
      std::max(1e-11, 1e3 * std::numeric_limits<double>::epsilon() * std::max(std::abs(pmid) + phalf, 1e-300) / phalf);
  for (double end : {-1.0, 1.0}) {
    double span = end - xs;
    if (std::abs(span) < 1e-300) continue;
    int levels = std::clamp(static_cast<int>(std::floor(std::log2(std::abs(span) / min_width))), 0, 40);
    double outer = 1.0;
    for (int l = 0; l < levels; ++l) {
      double inner = outer * 0.5;
      interval(std::min(xs + span * inner, xs + span * outer), std::max(xs + span * inner, xs + span * outer));
      outer = inner;
    }
    interval(std::min(xs, xs + span * outer), std::max(xs, xs + span * outer));
  }
}

}  // namespace

SlpMatrix assemble_slp(const PanelMesh& mesh) {
  const std::size_t n = mesh.size(), npp = mesh.nodes_per_panel, np = mesh.panels.size();
  const GaussRule& g = gauss_legendre_cached(mesh.nodes_per_panel);
  SlpMatrix out;
  out.mesh = &mesh;
  out.s.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      double r = norm(mesh.delta(j, k));
      out.s(j, k) = std::log(r) * mesh.weight[k] / (2.0 * kPi);
    }
  }
  PanelSampler ps{mesh};
  std::vector<double> pw(npp);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t p = mesh.panel_of[j];
    std::size_t i = j - p * npp;
    std::size_t prev = (p + np - 1) % np, next = (p + 1) % np;
    product_weights(ps, j, p, g.nodes[i], pw);
    for (std::size_t k = 0; k < npp; ++k) out.s(j, p * npp + k) = pw[k];
    if (np > 1) {
      product_weights(ps, j, next, -1.0, pw);
      for (std::size_t k = 0; k < npp; ++k) out.s(j, next * npp + k) = pw[k];
    }
    if (np > 2) {
      product_weights(ps, j, prev, 1.0, pw);
      for (std::size_t k = 0; k < npp; ++k) out.s(j, prev * npp + k) = pw[k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

cplx weighted_mean_numerator(const PanelMesh& mesh, const CVector& phi) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) s += mesh.weight[j] * phi[static_cast<Eigen::Index>(j)];
  return s;
}

CVector project_mean_zero(const PanelMesh& mesh, const CVector& phi, bool* warned) {
  if (static_cast<std::size_t>(phi.size()) != mesh.size()) throw ContractError("density size does not match mesh");
  cplx num = weighted_mean_numerator(mesh, phi);
  double scale = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) scale += mesh.weight[j] * std::abs(phi[static_cast<Eigen::Index>(j)]);
  bool bad = std::abs(num) > 1e-12 * scale;
  if (warned) *warned = bad;
  CVector out = phi;
  out.array() -= num / mesh.perimeter();
  return out;
}

cplx star_inner(const Density& phi, const Density& psi, const SlpMatrix& s) {
  if (!phi.mesh || phi.mesh != psi.mesh || phi.mesh != s.mesh)
    throw ContractError("star_inner: densities and operator live on different meshes");
  const PanelMesh& m = *phi.mesh;
  bool w1 = false, w2 = false;
  CVector a = project_mean_zero(m, phi.values, &w1);
  CVector b = project_mean_zero(m, psi.values, &w2);
  if (w1 || w2) spdlog::warn("star_inner: input density was not mean-zero; projected");
  CVector sb = s.s * b;
  cplx acc = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    auto jj = static_cast<Eigen::Index>(j);
    acc += m.weight[j] * a[jj] * std::conj(sb[jj]);
  }
  return -acc;
}

double star_norm(const Density& phi, const SlpMatrix& s) {
  double v = star_inner(phi, phi, s).real();
  return std::sqrt(std::max(v, 0.0));
}

double plemelj_defect(const NpMatrix& k, const SlpMatrix& s, int modes) {
  if (k.mesh != s.mesh || !k.mesh) throw ContractError("plemelj_defect: operators on different meshes");
  if (modes < 0) throw ParameterError("plemelj_defect: modes must be >= 0");
  const PanelMesh& m = *k.mesh;
  if (modes == 0) modes = static_cast<int>(std::min<std::size_t>(16, m.panels.size()));
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  RVector w = Eigen::Map<const RVector>(m.weight.data(), n);
  const std::vector<double> arc = node_arclength(m);
  const double per = m.perimeter();
  // mean-zero trigonometric densities in normalized arclength
  RMatrix f(n, 2 * modes);
  for (int q = 0; q < modes; ++q)
    for (Eigen::Index j = 0; j < n; ++j) {
      double t = 2.0 * kPi * (q + 1) * arc[static_cast<std::size_t>(j)] / per;
      f(j, 2 * q) = std::cos(t);
      f(j, 2 * q + 1) = std::sin(t);
    }
  RVector mean = (w.transpose() * f).transpose() / w.sum();
  f.rowwise() -= mean.transpose();
  RMatrix dl = double_layer_from(k);
  RMatrix d = s.s * (k.a * f) - dl * (s.s * f);
  RVector sw = w.array().sqrt();
  RMatrix g = sw.asDiagonal() * f;
  Eigen::HouseholderQR<RMatrix> qr(g);
  RMatrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  RMatrix b = (sw.asDiagonal() * d) * r.inverse();
  Eigen::JacobiSVD<RMatrix> svd(b);
  return svd.singularValues()(0);
}

std::vector<double> np_eigenvalues(const NpMatrix& k, int count, double imag_tol) {
  Eigen::EigenSolver<RMatrix> es(k.a, false);
  if (es.info() != Eigen::Success) throw DiscretizationError("np_eigenvalues: eigensolver failed");
  auto ev = es.eigenvalues();
  std::vector<cplx> vals(ev.data(), ev.data() + ev.size());
  auto it = std::min_element(vals.begin(), vals.end(),
                             [](cplx a, cplx b) { return std::abs(a - 0.5) < std::abs(b - 0.5); });
  if (it != vals.end()) vals.erase(it);
  std::sort(vals.begin(), vals.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
  if (count > 0 && static_cast<std::size_t>(count) < vals.size()) vals.resize(static_cast<std::size_t>(count));
  std::vector<double> out;
  out.reserve(vals.size());
  for (cplx v : vals) {
    if (std::abs(v.imag()) > imag_tol)
      throw DiscretizationError("np_eigenvalues: eigenvalue with imaginary part " + std::to_string(v.imag()));
    out.push_back(v.real());
  }
  return out;
}

}  // namespace npspec

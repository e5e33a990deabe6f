#include "npspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "npspec/quadrature.hpp"

namespace npspec {

void MeshConfig::validate() const {
  if (nodes_per_panel < 4 || nodes_per_panel > 64) throw ParameterError("nodes_per_panel must lie in [4, 64]");
  if (panels_per_arc < 0) throw ParameterError("panels_per_arc must be >= 0");
  if (corner_levels < 0) throw ParameterError("corner_levels must be >= 0");
  if (target_panel_length < 0.0) throw ParameterError("target_panel_length must be >= 0");
  if (!(refine_ratio > 0.0)) throw ParameterError("refine_ratio must be positive");
}

double PanelMesh::perimeter() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

double PanelMesh::area() const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) s += 0.5 * weight[j] * dot(x[j], normal[j]);
  return s;
}

double PanelMesh::panel_length(std::size_t p) const {
  double s = 0.0;
  const std::size_t n = nodes_per_panel;
  for (std::size_t j = p * n; j < (p + 1) * n; ++j) s += weight[j];
  return s;
}

std::vector<double> node_arclength(const PanelMesh& m) {
  const GaussRule& g = gauss_legendre_cached(m.nodes_per_panel);
  const std::size_t n = m.nodes_per_panel;
  // cum(i, k) = int_{-1}^{xi_i} l_k
  static thread_local int cached_n = 0;
  static thread_local Eigen::MatrixXd cum;
  if (cached_n != m.nodes_per_panel) {
    cum.resize(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double half = 0.5 * (g.nodes[i] + 1.0);
      std::vector<double> to(n);
      for (std::size_t q = 0; q < n; ++q) to[q] = -1.0 + half * (g.nodes[q] + 1.0);
      Eigen::MatrixXd li = interpolation_matrix(g.nodes, to);
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t q = 0; q < n; ++q) acc += half * g.weights[q] * li(q, k);
        cum(i, k) = acc;
      }
    }
    cached_n = m.nodes_per_panel;
  }
  std::vector<double> out(m.size());
  double start = 0.0;
  for (std::size_t p = 0; p < m.panels.size(); ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      // node weight / reference weight = speed times jacobian
      for (std::size_t k = 0; k < n; ++k) acc += cum(i, k) * m.weight[p * n + k] / g.weights[k];
      out[p * n + i] = start + acc;
    }
    start += m.panel_length(p);
  }
  return out;
}

PanelMesh mesh_from_panels(std::shared_ptr<const BoundaryCurve> curve, std::vector<Panel> panels,
                           int nodes_per_panel) {
  const GaussRule& g = gauss_legendre_cached(nodes_per_panel);
  PanelMesh m;
  m.curve = curve;
  m.nodes_per_panel = nodes_per_panel;
  m.panels = std::move(panels);
  const std::size_t total = m.panels.size() * nodes_per_panel;
  m.x.reserve(total);
  m.local.reserve(total);
  m.anchor.reserve(total);
  m.normal.reserve(total);
  m.weight.reserve(total);
  m.curvature.reserve(total);
  m.param.reserve(total);
  m.panel_of.reserve(total);
  const auto& corners = curve->corners();
  for (std::size_t p = 0; p < m.panels.size(); ++p) {
    const Panel& pn = m.panels[p];
    const SmoothArc& arc = *curve->arcs()[pn.arc];
    for (int i = 0; i < nodes_per_panel; ++i) {
      double s, jac;
      Vec2 pos, loc;
      int anc = -1;
      if (pn.corner >= 0) {
        double d = 0.5 * (pn.d0 + pn.d1) + 0.5 * (pn.d1 - pn.d0) * g.nodes[i];
        jac = 0.5 * std::abs(pn.d1 - pn.d0);
        const Vec2 v = corners[pn.corner].vertex;
        if (pn.side < 0) {
          s = 1.0 - d;
          loc = arc.offset_from_end(d);
        } else {
          s = d;
          loc = arc.offset_from_start(d);
        }
        pos = v + loc;
        anc = pn.corner;
      } else {
        s = 0.5 * (pn.s0 + pn.s1) + 0.5 * (pn.s1 - pn.s0) * g.nodes[i];
        jac = 0.5 * (pn.s1 - pn.s0);
        pos = arc.point(s);
        loc = pos;
      }
      Vec2 t = arc.d1(s);
      double sp = norm(t);
      m.x.push_back(pos);
      m.local.push_back(loc);
      m.anchor.push_back(anc);
      m.normal.push_back(rot_cw(t / sp));
      m.weight.push_back(g.weights[i] * jac * sp);
      m.curvature.push_back(arc.curvature(s));
      m.param.push_back(s);
      m.panel_of.push_back(p);
    }
  }
  // corner zones, nodes in curve order
  std::vector<int> zone_of(corners.size(), -1);
  for (std::size_t p = 0; p < m.panels.size(); ++p) {
    int c = m.panels[p].corner;
    if (c < 0) continue;
    if (zone_of[c] < 0) {
      zone_of[c] = static_cast<int>(m.corner_zones.size());
      m.corner_zones.push_back({c, {}, {}});
    }
  }
  // A zone may wrap past the end of the panel list; walk from its first
  // incoming panel.
  for (auto& z : m.corner_zones) {
    const std::size_t np = m.panels.size();
    std::size_t start = np;
    for (std::size_t p = 0; p < np; ++p) {
      const Panel& a = m.panels[p];
      const Panel& prev = m.panels[(p + np - 1) % np];
      if (a.corner == z.corner && !(prev.corner == z.corner)) {
        start = p;
        break;
      }
    }
    if (start == np) start = 0;
    for (std::size_t k = 0; k < np; ++k) {
      std::size_t p = (start + k) % np;
      if (m.panels[p].corner != z.corner) break;
      z.panels.push_back(p);
      for (int i = 0; i < nodes_per_panel; ++i) z.nodes.push_back(p * nodes_per_panel + i);
    }
  }
  std::sort(m.corner_zones.begin(), m.corner_zones.end(),
            [](const CornerZone& a, const CornerZone& b) { return a.corner < b.corner; });
  return m;
}

namespace {

double min_node_distance(const PanelMesh& m, std::size_t p, std::size_t q) {
  const std::size_t n = m.nodes_per_panel;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = p * n; i < (p + 1) * n; ++i)
    for (std::size_t j = q * n; j < (q + 1) * n; ++j) best = std::min(best, norm2(m.delta(i, j)));
  return std::sqrt(best);
}

// Polynomial interpolation of position and speed from the panel nodes,
// checked against the exact arc at off-node parameters.
bool geometry_resolved(const PanelMesh& m, std::size_t p) {
  const Panel& pn = m.panels[p];
  const SmoothArc& arc = *m.curve->arcs()[pn.arc];
  const GaussRule& g = gauss_legendre_cached(m.nodes_per_panel);
  static thread_local std::vector<double> bary, basis;
  bary = barycentric_weights(g.nodes);
  basis.resize(g.nodes.size());
  const std::size_t n = m.nodes_per_panel, base = p * n;
  double len = m.panel_length(p);
  double spmax = 0.0;
  std::vector<double> sp(n);
  for (std::size_t i = 0; i < n; ++i) {
    sp[i] = arc.speed(m.param[base + i]);
    spmax = std::max(spmax, sp[i]);
  }
  for (double xi : {-0.97, -0.5, 0.03, 0.51, 0.98}) {
    lagrange_basis(g.nodes, bary, xi, basis);
    Vec2 ip{};
    double isp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ip += m.x[base + i] * basis[i];
      isp += sp[i] * basis[i];
    }
    double s = 0.5 * (pn.s0 + pn.s1) + 0.5 * (pn.s1 - pn.s0) * xi;
    Vec2 ex = arc.point(s);
    // coordinates carry roundoff proportional to their magnitude
    double eps = std::numeric_limits<double>::epsilon();
    if (norm(ip - ex) > 1e-13 * len + 64 * eps * norm(ex)) return false;
    if (std::abs(isp - arc.speed(s)) > 1e-13 * spmax) return false;
  }
  return true;
}

std::vector<bool> refinement_marks(const PanelMesh& m) {
  const std::size_t np = m.panels.size();
  std::vector<bool> mark(np, false);
  std::vector<double> len(np);
  for (std::size_t p = 0; p < np; ++p) len[p] = m.panel_length(p);
  double maxlen = *std::max_element(len.begin(), len.end());
  for (std::size_t p = 0; p < np; ++p) {
    const std::size_t n = m.nodes_per_panel;
    double kmax = 0.0;
    for (std::size_t i = p * n; i < (p + 1) * n; ++i) kmax = std::max(kmax, std::abs(m.curvature[i]));
    if (len[p] * kmax > 1.0) mark[p] = true;
    else if (!geometry_resolved(m, p)) mark[p] = true;
  }
  // balance with curve neighbours; parameter halving does not halve the
  // arclength exactly, so 2:1 is enforced with some slack
  constexpr double kBalance = 2.5;
  for (std::size_t p = 0; p < np; ++p) {
    std::size_t prev = (p + np - 1) % np, next = (p + 1) % np;
    if (len[p] > kBalance * len[prev] || len[p] > kBalance * len[next]) mark[p] = true;
  }
  // separation from parts of the curve that are far away along the curve
  std::vector<Vec2> mid(np);
  std::vector<double> start(np + 1, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    mid[p] = m.x[p * m.nodes_per_panel + m.nodes_per_panel / 2];
    start[p + 1] = start[p] + len[p];
  }
  const double per = start[np];
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t q = 0; q < np; ++q) {
      if (q == p || q == (p + 1) % np || p == (q + 1) % np) continue;
      const Panel &a = m.panels[p], &b = m.panels[q];
      if (a.corner >= 0 && a.corner == b.corner) continue;
      if (norm(mid[p] - mid[q]) > 1.5 * len[p] + 0.5 * (len[p] + len[q]) + 1e-3 * maxlen) continue;
      double gap = q > p ? start[q] - start[p + 1] : start[p] - start[q + 1];
      gap = std::min(gap, per - gap - len[p] - len[q]);
      double dist = min_node_distance(m, p, q);
      if (dist > 0.5 * gap) continue;
      if (len[p] > 1.5 * dist) {
        mark[p] = true;
        break;
      }
    }
  }
  return mark;
}

void mark_refine_points(const PanelMesh& m, const std::vector<Vec2>& pts, double ratio,
                        std::vector<bool>& mark) {
  if (pts.empty()) return;
  const std::size_t n = m.nodes_per_panel;
  for (std::size_t p = 0; p < m.panels.size(); ++p) {
    double len = m.panel_length(p);
    for (const Vec2& z : pts) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i = p * n; i < (p + 1) * n; ++i) d = std::min(d, norm(m.x[i] - z));
      if (len > ratio * d) {
        mark[p] = true;
        break;
      }
    }
  }
}

Panel split_half(const Panel& p, bool first) {
  Panel c = p;
  double sm = 0.5 * (p.s0 + p.s1);
  if (first) c.s1 = sm; else c.s0 = sm;
  if (p.corner >= 0) {
    // d0 is the offset at s0 for either side
    double dm = 0.5 * (p.d0 + p.d1);
    if (first) c.d1 = dm; else c.d0 = dm;
  }
  return c;
}

// Coarse panels; corner zones hold two panels of parameter length h per side.
std::vector<Panel> coarse_layout(const BoundaryCurve& curve, const std::vector<double>& hc, double target,
                                 int fixed) {
  std::vector<Panel> out;
  for (std::size_t a = 0; a < curve.arc_count(); ++a) {
    const SmoothArc& arc = *curve.arcs()[a];
    const double len = arc.length();
    int cs = curve.corner_at_start(a), ce = curve.corner_at_end(a);
    if (fixed > 0) {
      if ((cs >= 0 || ce >= 0) && fixed < 4)
        throw MeshingError("arcs adjacent to a corner need at least 4 panels");
      if (len / fixed < 1e-12 * curve.perimeter()) throw MeshingError("arc too short for requested panel count");
      for (int k = 0; k < fixed; ++k) {
        Panel p;
        p.arc = a;
        p.s0 = static_cast<double>(k) / fixed;
        p.s1 = static_cast<double>(k + 1) / fixed;
        if (cs >= 0 && k < 2) {
          p.corner = cs, p.side = +1, p.d0 = p.s0, p.d1 = p.s1;
        } else if (ce >= 0 && k >= fixed - 2) {
          p.corner = ce, p.side = -1;
          p.d0 = static_cast<double>(fixed - k) / fixed;
          p.d1 = static_cast<double>(fixed - k - 1) / fixed;
        }
        out.push_back(p);
      }
      continue;
    }
    double lo = 0.0, hi = 1.0;
    std::vector<Panel> head, tail;
    if (cs >= 0) {
      double h = hc[cs] / len;
      for (int k = 0; k < 2; ++k) {
        Panel p;
        p.arc = a, p.s0 = k * h, p.s1 = (k + 1) * h, p.corner = cs, p.side = +1, p.d0 = k * h, p.d1 = (k + 1) * h;
        head.push_back(p);
      }
      lo = 2 * h;
    }
    if (ce >= 0) {
      double h = hc[ce] / len;
      for (int k = 1; k >= 0; --k) {
        Panel p;
        p.arc = a, p.s0 = 1.0 - (k + 1) * h, p.s1 = 1.0 - k * h, p.corner = ce, p.side = -1;
        p.d0 = (k + 1) * h, p.d1 = k * h;
        tail.push_back(p);
      }
      hi = 1.0 - 2 * h;
    }
    if (hi < lo - 1e-14) throw MeshingError("corner panels overlap on a short arc");
    out.insert(out.end(), head.begin(), head.end());
    double mid_len = (hi - lo) * len;
    if (mid_len > 1e-13 * len) {
      int count = std::max(1, static_cast<int>(std::ceil(mid_len / target - 1e-9)));
      for (int k = 0; k < count; ++k) {
        Panel p;
        p.arc = a;
        p.s0 = lo + (hi - lo) * k / count;
        p.s1 = (k + 1 == count) ? hi : lo + (hi - lo) * (k + 1) / count;
        out.push_back(p);
      }
    }
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return out;
}

}  // namespace

PanelMesh build_mesh(const BoundaryCurve& curve_in, const MeshConfig& cfg) {
  cfg.validate();
  auto curve = std::make_shared<const BoundaryCurve>(curve_in);
  const double per = curve->perimeter();
  const double target = cfg.target_panel_length > 0.0 ? cfg.target_panel_length : per / 24.0;
  const auto& corners = curve->corners();
  const std::size_t nc = corners.size();

  std::vector<double> hc(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::size_t ain = corners[c].arc_index, aout = (ain + 1) % curve->arc_count();
    hc[c] = std::min({curve->arcs()[ain]->length(), curve->arcs()[aout]->length()}) / 4.0;
    hc[c] = std::min(hc[c], target);
  }

  std::vector<Panel> coarse;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 60) throw MeshingError("corner panel size did not settle");
    coarse = coarse_layout(*curve, hc, target, cfg.panels_per_arc);
    if (cfg.panels_per_arc > 0) break;
    bool restart = false;
    for (int iter = 0;; ++iter) {
      if (iter > 200) throw MeshingError("adaptive refinement did not terminate");
      PanelMesh m = mesh_from_panels(curve, coarse, cfg.nodes_per_panel);
      auto mark = refinement_marks(m);
      mark_refine_points(m, cfg.refine_points, cfg.refine_ratio, mark);
      std::vector<bool> shrink(nc, false);
      bool any = false;
      for (std::size_t p = 0; p < coarse.size(); ++p) {
        if (!mark[p]) continue;
        any = true;
        if (coarse[p].corner >= 0) shrink[coarse[p].corner] = true;
      }
      spdlog::debug("mesh refinement attempt {} iter {}: {} panels", attempt, iter, coarse.size());
      if (!any) break;
      if (std::any_of(shrink.begin(), shrink.end(), [](bool b) { return b; })) {
        for (std::size_t c = 0; c < nc; ++c)
          if (shrink[c]) hc[c] *= 0.5;
        restart = true;
        break;
      }
      std::vector<Panel> next;
      for (std::size_t p = 0; p < coarse.size(); ++p) {
        if (mark[p]) {
          next.push_back(split_half(coarse[p], true));
          next.push_back(split_half(coarse[p], false));
        } else {
          next.push_back(coarse[p]);
        }
      }
      coarse.swap(next);
    }
    if (!restart) break;
  }

  // dyadic grading of the innermost coarse panel on each side of a corner
  const int L = std::max(1, cfg.corner_levels);
  std::vector<Panel> fine;
  for (const Panel& p : coarse) {
    bool inner = p.corner >= 0 && std::min(p.d0, p.d1) == 0.0;
    if (!inner || L == 1) {
      fine.push_back(p);
      continue;
    }
    const double h = std::max(p.d0, p.d1);
    std::vector<Panel> seq;  // from the vertex outward, d0 < d1
    // two innermost panels of size h 2^-(L-1), then h 2^-(L-2), ..., h/2
    {
      Panel c = p;
      c.level = L - 1;
      c.d0 = 0.0, c.d1 = std::ldexp(h, -(L - 1));
      if (cfg.include_closest_panel_to_vertex) seq.push_back(c);
      for (int k = L - 1; k >= 1; --k) {
        Panel e = p;
        e.level = k;
        e.d0 = std::ldexp(h, -k), e.d1 = std::ldexp(h, -(k - 1));
        if (k == 1) e.d1 = h;
        seq.push_back(e);
      }
    }
    // express in parameter coordinates and curve order
    for (auto& c : seq) {
      if (p.side > 0) {
        c.s0 = c.d0, c.s1 = c.d1;
      } else {
        c.s0 = 1.0 - c.d1, c.s1 = 1.0 - c.d0;
        std::swap(c.d0, c.d1);
      }
    }
    if (p.side < 0) std::reverse(seq.begin(), seq.end());
    fine.insert(fine.end(), seq.begin(), seq.end());
  }
  return mesh_from_panels(curve, std::move(fine), cfg.nodes_per_panel);
}

PanelMesh refine_mesh(const PanelMesh& mesh, int factor) {
  if (factor < 2) throw ParameterError("refine_mesh: factor must be >= 2");
  std::vector<Panel> out;
  for (const Panel& p : mesh.panels) {
    for (int k = 0; k < factor; ++k) {
      Panel c = p;
      double a = static_cast<double>(k) / factor, b = static_cast<double>(k + 1) / factor;
      c.s0 = p.s0 + (p.s1 - p.s0) * a;
      c.s1 = (k + 1 == factor) ? p.s1 : p.s0 + (p.s1 - p.s0) * b;
      if (p.corner >= 0) {
        c.d0 = p.d0 + (p.d1 - p.d0) * a;
        c.d1 = (k + 1 == factor) ? p.d1 : p.d0 + (p.d1 - p.d0) * b;
      }
      out.push_back(c);
    }
  }
  return mesh_from_panels(mesh.curve, std::move(out), mesh.nodes_per_panel);
}

}  // namespace npspec

#include "npspec/corner_compress.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "npspec/quadrature.hpp"
#include "npspec/simd/kernels.hpp"

namespace npspec {

CMatrix LevelMap::apply(const CMatrix& r) const {
  const Eigen::Index n = r.rows();
  CMatrix m = CMatrix::Identity(n, n) - x * r;
  return a + u * (r * m.partialPivLu().solve(v));
}

LevelMap compose(const LevelMap& first, const LevelMap& second) {
  const Eigen::Index n = first.a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  // Q = (I - a1 x2)^-1; (I - x2 a1)^-1 = I + x2 Q a1
  Eigen::PartialPivLU<CMatrix> q(id - first.a * second.x);
  CMatrix qa1 = q.solve(first.a);
  CMatrix qu1 = q.solve(first.u);
  LevelMap out;
  out.a = second.a + second.u * (qa1 * second.v);
  out.u = second.u * qu1;
  out.v = first.v * (second.v + second.x * (qa1 * second.v));
  out.x = first.x + first.v * (second.x * qu1);
  // (c u, v / c) is the same map; keep the two factors comparable in size
  double nu = out.u.norm(), nv = out.v.norm();
  if (nu > 0.0 && nv > 0.0) {
    double c = std::sqrt(nv / nu);
    out.u *= c;
    out.v /= c;
  }
  return out;
}

namespace {

// Node data of a few panels near one corner, relative to the vertex.
struct LocalNodes {
  std::vector<Vec2> x, normal;
  std::vector<double> weight, curvature;
  std::size_t size() const { return x.size(); }
};

// One side of a corner as seen from the vertex.
struct SideGeom {
  const SmoothArc* arc = nullptr;
  bool incoming = false;  // arc ends at the vertex
  double h = 0.0;         // parameter length of the inner coarse panel
  Vec2 tangent;           // d1 at the vertex
};

struct CornerGeom {
  SideGeom in, out;
};

void append_panel(const SideGeom& side, double d0, double d1, bool wedge, int npp, LocalNodes& out) {
  const GaussRule& g = gauss_legendre_cached(npp);
  const double mid = 0.5 * (d0 + d1), half = 0.5 * (d1 - d0);
  for (int i = 0; i < npp; ++i) {
    double d = mid + half * g.nodes[static_cast<std::size_t>(i)];
    Vec2 pos, tan;
    double kappa = 0.0;
    if (wedge) {
      pos = side.incoming ? side.tangent * (-d) : side.tangent * d;
      tan = side.tangent;
    } else if (side.incoming) {
      pos = side.arc->offset_from_end(d);
      tan = side.arc->d1(1.0 - d);
      kappa = side.arc->curvature(1.0 - d);
    } else {
      pos = side.arc->offset_from_start(d);
      tan = side.arc->d1(d);
      kappa = side.arc->curvature(d);
    }
    double sp = norm(tan);
    out.x.push_back(pos);
    out.normal.push_back(rot_cw(tan / sp));
    out.weight.push_back(g.weights[static_cast<std::size_t>(i)] * std::abs(half) * sp);
    out.curvature.push_back(kappa);
  }
}

// b-mesh at depth k: per side panels of parameter size s, s, 2s from the
// vertex with s = h 2^-(k+1); nodes in curve order.
LocalNodes b_mesh(const CornerGeom& cg, int depth, bool wedge, int npp) {
  LocalNodes out;
  const double si = std::ldexp(cg.in.h, -(depth + 1)), so = std::ldexp(cg.out.h, -(depth + 1));
  append_panel(cg.in, 4 * si, 2 * si, wedge, npp, out);
  append_panel(cg.in, 2 * si, si, wedge, npp, out);
  append_panel(cg.in, si, 0.0, wedge, npp, out);
  append_panel(cg.out, 0.0, so, wedge, npp, out);
  append_panel(cg.out, so, 2 * so, wedge, npp, out);
  append_panel(cg.out, 2 * so, 4 * so, wedge, npp, out);
  return out;
}

// c-mesh at depth k: per side panels of size 2s, 2s.
LocalNodes c_mesh(const CornerGeom& cg, int depth, bool wedge, int npp) {
  LocalNodes out;
  const double si = std::ldexp(cg.in.h, -(depth + 1)), so = std::ldexp(cg.out.h, -(depth + 1));
  append_panel(cg.in, 4 * si, 2 * si, wedge, npp, out);
  append_panel(cg.in, 2 * si, 0.0, wedge, npp, out);
  append_panel(cg.out, 0.0, 2 * so, wedge, npp, out);
  append_panel(cg.out, 2 * so, 4 * so, wedge, npp, out);
  return out;
}

RMatrix local_np(const LocalNodes& m) {
  const std::size_t n = m.size();
  std::vector<double> sx(n), sy(n), row(n);
  for (std::size_t k = 0; k < n; ++k) sx[k] = m.x[k].x, sy[k] = m.x[k].y;
  RMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    simd::NpRowArgs args{m.x[j].x, m.x[j].y, m.normal[j].x, m.normal[j].y, sx.data(), sy.data(),
                         m.weight.data(), n, row.data()};
    simd::np_row(args);
    row[j] = m.curvature[j] * m.weight[j] / (4.0 * kPi);
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(row[k])) throw AssemblyError("corner block: coincident nodes");
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  return a;
}

// c-mesh (4 panels) to b-mesh (6 panels): the inner c-panel on each side is
// split in half, the outer ones are copied.
RMatrix prolongation(int npp) {
  const GaussRule& g = gauss_legendre_cached(npp);
  std::vector<double> lo(npp), hi(npp);
  for (int i = 0; i < npp; ++i) {
    lo[i] = 0.5 * (g.nodes[i] - 1.0);
    hi[i] = 0.5 * (g.nodes[i] + 1.0);
  }
  RMatrix il = interpolation_matrix(g.nodes, lo), ih = interpolation_matrix(g.nodes, hi);
  const Eigen::Index n = npp;
  RMatrix p = RMatrix::Zero(6 * n, 4 * n);
  p.block(0, 0, n, n).setIdentity();
  p.block(n, n, n, n) = il;
  p.block(2 * n, n, n, n) = ih;
  p.block(3 * n, 2 * n, n, n) = il;
  p.block(4 * n, 2 * n, n, n) = ih;
  p.block(5 * n, 3 * n, n, n).setIdentity();
  return p;
}

struct LevelParts {
  LevelMap map;
  CMatrix e, f, c_inv;
};

// Level map for one b-mesh given its K* block.
LevelParts level_parts(const RMatrix& ab, const LocalNodes& b, const LocalNodes& c, const RMatrix& p, cplx lambda,
                       int npp) {
  const Eigen::Index n = npp, ni = 4 * n, no = 2 * n;
  // inner = b panels 1..4, outer = b panels 0 and 5
  auto outer_index = [n](Eigen::Index k) { return k < n ? k : k + 4 * n; };
  CMatrix a_oo(no, no), a_io(ni, no), a_oi(no, ni);
  for (Eigen::Index r = 0; r < no; ++r)
    for (Eigen::Index s = 0; s < no; ++s) a_oo(r, s) = ab(outer_index(r), outer_index(s));
  for (Eigen::Index r = 0; r < ni; ++r)
    for (Eigen::Index s = 0; s < no; ++s) {
      a_io(r, s) = ab(n + r, outer_index(s));
      a_oi(s, r) = ab(outer_index(s), n + r);
    }
  // P_W^T = W_c^-1 P^T W_b
  RMatrix pwt(4 * n, 6 * n);
  for (Eigen::Index r = 0; r < 4 * n; ++r)
    for (Eigen::Index s = 0; s < 6 * n; ++s)
      pwt(r, s) = p(s, r) * b.weight[static_cast<std::size_t>(s)] / c.weight[static_cast<std::size_t>(r)];
  CMatrix p_i = p.middleRows(n, ni).cast<cplx>();
  CMatrix p_o(no, 4 * n), pw_i = pwt.middleCols(n, ni).cast<cplx>(), pw_o(4 * n, no);
  for (Eigen::Index r = 0; r < no; ++r) p_o.row(r) = p.row(outer_index(r)).cast<cplx>();
  for (Eigen::Index s = 0; s < no; ++s) pw_o.col(s) = pwt.col(outer_index(s)).cast<cplx>();

  CMatrix cmat = lambda * CMatrix::Identity(no, no) - a_oo;
  LevelParts out;
  out.c_inv = cmat.partialPivLu().inverse();
  // B = -A_io, Cb = -A_oi
  out.e = -a_io * out.c_inv;
  out.f = out.c_inv * (-a_oi);
  out.map.a = pw_o * out.c_inv * p_o;
  out.map.u = pw_i - pw_o * out.f;
  out.map.v = p_i - out.e * p_o;
  out.map.x = out.e * (-a_oi);
  return out;
}

// Inverse of lambda - A on the inner nodes of a b-mesh; excluded nodes
// carry zero density.
CMatrix innermost_block(const RMatrix& ab, cplx lambda, int npp, const std::vector<char>& active) {
  const Eigen::Index n = npp, ni = 4 * n;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < ni; ++r)
    if (active[static_cast<std::size_t>(r)]) keep.push_back(r);
  const Eigen::Index nk = static_cast<Eigen::Index>(keep.size());
  CMatrix m(nk, nk);
  for (Eigen::Index r = 0; r < nk; ++r)
    for (Eigen::Index s = 0; s < nk; ++s)
      m(r, s) = (r == s ? lambda : cplx(0.0)) - ab(n + keep[r], n + keep[s]);
  CMatrix inv = m.partialPivLu().inverse();
  CMatrix out = CMatrix::Zero(ni, ni);
  for (Eigen::Index r = 0; r < nk; ++r)
    for (Eigen::Index s = 0; s < nk; ++s) out(keep[r], keep[s]) = inv(r, s);
  return out;
}

double rel_change(const CMatrix& a, const CMatrix& b) {
  double nb = b.norm();
  return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

bool all_finite(const CMatrix& m) { return m.allFinite(); }

CornerGeom corner_geometry(const PanelMesh& coarse, const CornerZone& zone) {
  if (zone.panels.size() != 4)
    throw ContractError("compression needs exactly two coarse panels per side of each corner");
  const auto& corners = coarse.curve->corners();
  const CornerInfo& ci = corners[static_cast<std::size_t>(zone.corner)];
  const auto& arcs = coarse.curve->arcs();
  const std::size_t ain = ci.arc_index, aout = (ain + 1) % arcs.size();
  const Panel& pin = coarse.panels[zone.panels[1]];
  const Panel& pout = coarse.panels[zone.panels[2]];
  if (pin.side >= 0 || pout.side <= 0 || pin.arc != ain || pout.arc != aout)
    throw ContractError("corner zone panels out of order");
  CornerGeom cg;
  cg.in = {arcs[ain].get(), true, std::max(pin.d0, pin.d1), arcs[ain]->d1(1.0)};
  cg.out = {arcs[aout].get(), false, std::max(pout.d0, pout.d1), arcs[aout]->d1(0.0)};
  return cg;
}

double wedge_deviation(const LocalNodes& actual, const LocalNodes& wedge) {
  double scale = 0.0, dev = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    scale = std::max(scale, norm(wedge.x[k]));
    dev = std::max(dev, norm(actual.x[k] - wedge.x[k]));
  }
  double wdev = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k)
    wdev = std::max(wdev, std::abs(actual.weight[k] - wedge.weight[k]) / wedge.weight[k]);
  return std::max(dev / scale, wdev);
}

// Rotation-invariant description of the corner geometry actually used.
std::vector<double> signature(const CornerGeom& cg, int levels, bool wedge_tail, int npp) {
  std::vector<double> sig;
  const double ang = std::atan2(cg.in.tangent.y, cg.in.tangent.x);
  const double c = std::cos(-ang), s = std::sin(-ang);
  auto rot = [&](Vec2 v) { return Vec2{c * v.x - s * v.y, s * v.x + c * v.y}; };
  auto add = [&](const LocalNodes& m) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      Vec2 p = rot(m.x[k]), q = rot(m.normal[k]);
      sig.insert(sig.end(), {p.x, p.y, q.x, q.y, m.weight[k], m.curvature[k]});
    }
  };
  for (int k = 0; k < levels; ++k) add(b_mesh(cg, k, false, npp));
  if (wedge_tail) add(b_mesh(cg, 0, true, npp));
  sig.push_back(static_cast<double>(levels));
  return sig;
}

bool same_signature(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > 1e-13 * std::max({1.0, std::abs(a[k]), std::abs(b[k])})) return false;
  return true;
}

struct BlockResult {
  CMatrix r;
  int explicit_levels = 0, doublings = 0;
  std::vector<double> level_updates, tail_updates;
  std::vector<LevelRecord> records;
};

BlockResult compress_corner(const CornerGeom& cg, cplx lambda, int npp, const CompressionOptions& opts,
                            int truncated_levels, bool include_closest) {
  const RMatrix p = prolongation(npp);
  BlockResult out;
  const Eigen::Index ni = 4 * npp;
  if (opts.tail == CompressionOptions::Tail::Truncated) {
    const int nsub = std::max(truncated_levels, 1) - 1;
    if (nsub == 0) {
      // no grading: the corner block is the inverse on the coarse panels
      LocalNodes c = c_mesh(cg, 0, false, npp);
      RMatrix a = local_np(c);
      CMatrix m = lambda * CMatrix::Identity(ni, ni) - a.cast<cplx>();
      out.r = m.partialPivLu().inverse();
      if (!all_finite(out.r)) throw CompressionError("non-finite corner block", 0);
      return out;
    }
    std::vector<char> active(static_cast<std::size_t>(ni), 1);
    if (!include_closest) {
      // b panel 2 (incoming, touching the vertex) and b panel 3 (outgoing)
      for (int i = 0; i < npp; ++i) {
        active[static_cast<std::size_t>(npp + i)] = 0;
        active[static_cast<std::size_t>(2 * npp + i)] = 0;
      }
    }
    CMatrix r;
    for (int depth = nsub - 1; depth >= 0; --depth) {
      LocalNodes b = b_mesh(cg, depth, false, npp);
      LocalNodes c = c_mesh(cg, depth, false, npp);
      RMatrix ab = local_np(b);
      if (depth == nsub - 1) r = innermost_block(ab, lambda, npp, active);
      LevelParts lp = level_parts(ab, b, c, p, lambda, npp);
      LevelRecord rec;
      rec.r_in = r;
      rec.x = lp.map.x;
      rec.e = lp.e;
      rec.f = lp.f;
      rec.c_inv = lp.c_inv;
      rec.p = p.cast<cplx>();
      if (depth == nsub - 1) rec.active = active;
      CMatrix next = lp.map.apply(r);
      if (!all_finite(next)) throw CompressionError("non-finite corner block", nsub - depth);
      if (depth != nsub - 1) out.level_updates.push_back(rel_change(r, next));
      out.records.push_back(std::move(rec));
      r = std::move(next);
    }
    out.r = std::move(r);
    out.explicit_levels = nsub;
    return out;
  }

  // explicit levels until the corner looks like its tangent wedge
  int explicit_levels = 0;
  constexpr int kMaxExplicit = 200;
  while (explicit_levels < kMaxExplicit) {
    LocalNodes act = b_mesh(cg, explicit_levels, false, npp);
    LocalNodes wed = b_mesh(cg, explicit_levels, true, npp);
    if (wedge_deviation(act, wed) <= opts.wedge_tol) break;
    ++explicit_levels;
  }
  if (explicit_levels == kMaxExplicit) throw CompressionError("corner never approaches its tangent wedge", kMaxExplicit);

  // self-similar tail by repeated doubling of the wedge level map
  LocalNodes wb = b_mesh(cg, 0, true, npp), wc = c_mesh(cg, 0, true, npp);
  RMatrix wa = local_np(wb);
  LevelMap g = level_parts(wa, wb, wc, p, lambda, npp).map;
  std::vector<char> active(static_cast<std::size_t>(ni), 1);
  const CMatrix start = innermost_block(wa, lambda, npp, active);
  CMatrix value = g.apply(start);
  bool converged = false;
  for (int m = 0; m < opts.max_doublings; ++m) {
    // sensitivity of the tail to the innermost block
    double sens = rel_change(g.a, value);
    out.tail_updates.push_back(sens);
    spdlog::debug("tail doubling {}: sensitivity {:.3e} |a| {:.3e} |u| {:.3e} |v| {:.3e} |x| {:.3e}", m, sens, g.a.norm(),
                  g.u.norm(), g.v.norm(), g.x.norm());
    out.doublings = m;
    if (sens <= opts.tail_tol) {
      converged = true;
      break;
    }
    g = compose(g, g);
    value = g.apply(start);
    if (!all_finite(value)) throw CompressionError("non-finite tail block", explicit_levels + m);
  }
  if (!converged) throw CompressionError("self-similar tail did not converge", explicit_levels + opts.max_doublings);
  CMatrix r = value;
  for (int depth = explicit_levels - 1; depth >= 0; --depth) {
    LocalNodes b = b_mesh(cg, depth, false, npp);
    LocalNodes c = c_mesh(cg, depth, false, npp);
    LevelParts lp = level_parts(local_np(b), b, c, p, lambda, npp);
    CMatrix next = lp.map.apply(r);
    if (!all_finite(next)) throw CompressionError("non-finite corner block", depth);
    out.level_updates.push_back(rel_change(r, next));
    r = std::move(next);
  }
  out.r = std::move(r);
  out.explicit_levels = explicit_levels;
  return out;
}

}  // namespace

std::shared_ptr<const PanelMesh> coarse_mesh_for(const BoundaryCurve& curve, const MeshConfig& cfg) {
  MeshConfig c = cfg;
  c.corner_levels = 1;
  return std::make_shared<const PanelMesh>(build_mesh(curve, c));
}

CompressedSystem build_compression(const BoundaryCurve& curve, const MeshConfig& cfg, double t, double delta,
                                   const CompressionOptions& opts) {
  return build_compression(coarse_mesh_for(curve, cfg), cfg, t, delta, opts);
}

CompressedSystem build_compression(std::shared_ptr<const PanelMesh> coarse, const MeshConfig& cfg, double t,
                                   double delta, const CompressionOptions& opts, const RMatrix* coarse_np) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (!std::isfinite(t)) throw ParameterError("t must be finite");
  CompressedSystem sys;
  sys.coarse = coarse;
  sys.lambda = cplx(t, delta);
  sys.options = opts;
  sys.truncated_levels = cfg.corner_levels;
  sys.include_closest_panel = cfg.include_closest_panel_to_vertex;
  sys.mesh_config = cfg;
  const PanelMesh& m = *coarse;
  const int npp = m.nodes_per_panel;
  sys.coarse_np = coarse_np ? *coarse_np : assemble_np(m).a;

  std::vector<std::vector<double>> sigs;
  for (const CornerZone& zone : m.corner_zones) {
    CornerGeom cg = corner_geometry(m, zone);
    CornerBlock blk;
    blk.corner = zone.corner;
    blk.nodes = zone.nodes;
    std::vector<double> sig;
    const bool truncated = opts.tail == CompressionOptions::Tail::Truncated;
    if (opts.reuse_congruent) {
      int lv = 0;
      if (truncated) {
        lv = std::max(cfg.corner_levels, 1) - 1;
      } else {
        while (lv < 200 && wedge_deviation(b_mesh(cg, lv, false, npp), b_mesh(cg, lv, true, npp)) > opts.wedge_tol) ++lv;
      }
      sig = signature(cg, lv, !truncated, npp);
      for (std::size_t q = 0; q < sigs.size(); ++q) {
        if (!same_signature(sig, sigs[q])) continue;
        const CornerBlock& src = sys.corners[q];
        blk.r = src.r;
        blk.explicit_levels = src.explicit_levels;
        blk.doublings = src.doublings;
        blk.level_updates = src.level_updates;
        blk.tail_updates = src.tail_updates;
        blk.records = src.records;
        blk.reused_from = src.corner;
        break;
      }
    }
    if (blk.reused_from < 0) {
      BlockResult br = compress_corner(cg, sys.lambda, npp, opts, cfg.corner_levels, cfg.include_closest_panel_to_vertex);
      blk.r = std::move(br.r);
      blk.explicit_levels = br.explicit_levels;
      blk.doublings = br.doublings;
      blk.level_updates = std::move(br.level_updates);
      blk.tail_updates = std::move(br.tail_updates);
      blk.records = std::move(br.records);
    }
    sigs.push_back(std::move(sig));
    sys.corners.push_back(std::move(blk));
  }

  // (I - A° R) D with A° the coarse K* minus each corner's self block and
  // D = lambda off the corner zones, so those unknowns are rho_hat itself
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  std::vector<int> zone_of(m.size(), -1);
  for (std::size_t c = 0; c < sys.corners.size(); ++c)
    for (std::size_t k : sys.corners[c].nodes) zone_of[k] = static_cast<int>(c);
  sys.in_zone.assign(m.size(), 0);
  sys.system_matrix.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (zone_of[static_cast<std::size_t>(k)] >= 0) {
      sys.in_zone[static_cast<std::size_t>(k)] = 1;
      continue;
    }
    sys.system_matrix.col(k) = -sys.coarse_np.col(k).cast<cplx>();
    sys.system_matrix(k, k) += sys.lambda;
  }
  for (const CornerBlock& blk : sys.corners) {
    const Eigen::Index nz = static_cast<Eigen::Index>(blk.nodes.size());
    CMatrix a_cols(n, nz);
    for (Eigen::Index q = 0; q < nz; ++q) {
      a_cols.col(q) = sys.coarse_np.col(static_cast<Eigen::Index>(blk.nodes[static_cast<std::size_t>(q)])).cast<cplx>();
      for (Eigen::Index r = 0; r < nz; ++r) a_cols(static_cast<Eigen::Index>(blk.nodes[static_cast<std::size_t>(r)]), q) = 0.0;
    }
    CMatrix prod = -a_cols * blk.r;
    for (Eigen::Index q = 0; q < nz; ++q)
      sys.system_matrix.col(static_cast<Eigen::Index>(blk.nodes[static_cast<std::size_t>(q)])) = prod.col(q);
  }
  for (const CornerBlock& blk : sys.corners)
    for (std::size_t k : blk.nodes) sys.system_matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += 1.0;
  // power-of-two column equilibration
  sys.col_scale.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    int e = 0;
    std::frexp(sys.system_matrix.col(k).cwiseAbs().maxCoeff(), &e);
    sys.col_scale[k] = std::ldexp(1.0, -e);
  }
  sys.lu.compute(sys.system_matrix * sys.col_scale.asDiagonal());
  sys.rcond = sys.lu.rcond();
  if (!(sys.rcond > kSingularRcond)) throw NearSingularError("compressed system is singular to working precision", 1.0 / sys.rcond);
  if (sys.rcond < 1e-12) spdlog::warn("compressed system near singular at t={} delta={}: cond ~ {:.3g}", t, delta, 1.0 / sys.rcond);
  return sys;
}

CompressedSolution CompressedSystem::solve(const CMatrix& f) const {
  if (f.rows() != static_cast<Eigen::Index>(coarse->size())) throw ContractError("right-hand side size does not match the coarse mesh");
  CompressedSolution sol;
  CMatrix y = col_scale.asDiagonal() * lu.solve(f);
  CMatrix res = system_matrix * y - f;
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    double fn = f.col(c).norm();
    sol.residual = std::max(sol.residual, fn > 0.0 ? res.col(c).norm() / fn : res.col(c).norm());
  }
  sol.rho_hat = y;
  sol.rho_tilde = y;
  for (Eigen::Index k = 0; k < y.rows(); ++k)
    if (!in_zone[static_cast<std::size_t>(k)]) sol.rho_tilde.row(k) *= lambda;
  for (const CornerBlock& blk : corners) {
    const Eigen::Index nz = static_cast<Eigen::Index>(blk.nodes.size());
    CMatrix loc(nz, f.cols());
    for (Eigen::Index q = 0; q < nz; ++q) loc.row(q) = sol.rho_tilde.row(static_cast<Eigen::Index>(blk.nodes[static_cast<std::size_t>(q)]));
    CMatrix out = blk.r * loc;
    for (Eigen::Index q = 0; q < nz; ++q) sol.rho_hat.row(static_cast<Eigen::Index>(blk.nodes[static_cast<std::size_t>(q)])) = out.row(q);
  }
  return sol;
}

std::shared_ptr<const PanelMesh> CompressedSystem::fine_mesh() const {
  if (options.tail != CompressionOptions::Tail::Truncated) throw ContractError("fine mesh exists only for truncated compression");
  return std::make_shared<const PanelMesh>(build_mesh(*coarse->curve, mesh_config));
}

CVector CompressedSystem::reconstruct(const CompressedSolution& sol, Eigen::Index column) const {
  if (options.tail != CompressionOptions::Tail::Truncated) throw ContractError("reconstruction needs truncated compression");
  const PanelMesh& cm = *coarse;
  const int npp = cm.nodes_per_panel;
  const Eigen::Index n = npp;
  auto fine = fine_mesh();
  CVector out = CVector::Zero(static_cast<Eigen::Index>(fine->size()));
  // nodes outside the corner zones map one to one in order
  std::vector<char> in_zone_c(cm.size(), 0), in_zone_f(fine->size(), 0);
  for (const auto& z : cm.corner_zones)
    for (std::size_t k : z.nodes) in_zone_c[k] = 1;
  for (const auto& z : fine->corner_zones)
    for (std::size_t k : z.nodes) in_zone_f[k] = 1;
  {
    std::size_t kc = 0;
    for (std::size_t kf = 0; kf < fine->size(); ++kf) {
      if (in_zone_f[kf]) continue;
      while (in_zone_c[kc]) ++kc;
      out[static_cast<Eigen::Index>(kf)] = sol.rho_hat(static_cast<Eigen::Index>(kc), column);
      ++kc;
    }
  }
  for (std::size_t c = 0; c < corners.size(); ++c) {
    const CornerBlock& blk = corners[c];
    const CornerZone* fz = nullptr;
    for (const auto& z : fine->corner_zones)
      if (z.corner == blk.corner) fz = &z;
    if (!fz) throw ContractError("fine mesh lacks a corner zone");
    CVector rt(static_cast<Eigen::Index>(blk.nodes.size()));
    for (std::size_t q = 0; q < blk.nodes.size(); ++q) rt[static_cast<Eigen::Index>(q)] = sol.rho_tilde(static_cast<Eigen::Index>(blk.nodes[q]), column);
    const std::size_t levels = blk.records.size();
    // outer panel densities per level, coarsest first
    std::vector<CVector> outer_in, outer_out;
    CVector inner;
    if (levels == 0) {
      inner = blk.r * rt;
    } else {
      for (std::size_t li = levels; li-- > 0;) {
        const LevelRecord& rec = blk.records[li];
        CVector y = rec.p * rt;
        CVector yi = y.segment(n, 4 * n);
        CVector yo(2 * n);
        yo << y.head(n), y.tail(n);
        const Eigen::Index ni = 4 * n;
        CMatrix m = CMatrix::Identity(ni, ni) - rec.x * rec.r_in;
        CVector ut = m.partialPivLu().solve(yi - rec.e * yo);
        CVector u = rec.r_in * ut;
        CVector v = rec.c_inv * yo - rec.f * u;
        outer_in.push_back(v.head(n));
        outer_out.push_back(v.tail(n));
        rt = ut;
        if (li == 0) inner = u;
      }
    }
    // zone nodes in curve order: incoming outers (coarsest first), inner
    // panels, outgoing outers (finest first)
    std::vector<cplx> vals;
    for (const auto& v : outer_in)
      for (Eigen::Index k = 0; k < n; ++k) vals.push_back(v[k]);
    for (Eigen::Index k = 0; k < 4 * n; ++k) {
      bool excluded = levels > 0 && !include_closest_panel && k >= n && k < 3 * n;
      if (!excluded) vals.push_back(inner[k]);
    }
    for (std::size_t li = outer_out.size(); li-- > 0;)
      for (Eigen::Index k = 0; k < n; ++k) vals.push_back(outer_out[li][k]);
    if (vals.size() != fz->nodes.size()) throw ContractError("reconstructed corner does not match the fine mesh");
    for (std::size_t q = 0; q < vals.size(); ++q) out[static_cast<Eigen::Index>(fz->nodes[q])] = vals[q];
  }
  return out;
}

BruteForceSystem build_brute_force(std::shared_ptr<const PanelMesh> fine, double t, double delta, const RMatrix* np) {
  if (!(delta >= 0.0)) throw ParameterError("delta must be >= 0");
  BruteForceSystem sys;
  sys.mesh = fine;
  sys.lambda = cplx(t, delta);
  sys.np = np ? *np : assemble_np(*fine).a;
  CMatrix m = -sys.np.cast<cplx>();
  m.diagonal().array() += sys.lambda;
  sys.lu.compute(m);
  sys.rcond = sys.lu.rcond();
  if (!(sys.rcond > kSingularRcond)) throw NearSingularError("graded system is singular to working precision", 1.0 / sys.rcond);
  if (sys.rcond < 1e-12) spdlog::warn("graded system near singular at t={} delta={}: cond ~ {:.3g}", t, delta, 1.0 / sys.rcond);
  return sys;
}

CMatrix BruteForceSystem::solve(const CMatrix& f, double* residual) const {
  if (f.rows() != np.rows()) throw ContractError("right-hand side size does not match the mesh");
  CMatrix x = lu.solve(f);
  if (residual) {
    CMatrix r = lambda * x - np.cast<cplx>() * x - f;
    double worst = 0.0;
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      double fn = f.col(c).norm();
      worst = std::max(worst, fn > 0.0 ? r.col(c).norm() / fn : r.col(c).norm());
    }
    *residual = worst;
  }
  return x;
}

Density solve_brute_force(const BruteForceSystem& sys, const CVector& f, double* residual) {
  CMatrix x = sys.solve(f, residual);
  return Density{x.col(0), sys.mesh.get()};
}

}  // namespace npspec

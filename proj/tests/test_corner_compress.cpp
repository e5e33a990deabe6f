#include <cmath>
#include <random>

#include "doctest.h"
#include "npspec/corner_compress.hpp"
#include "npspec/resolvent.hpp"

using namespace npspec;

namespace {
CMatrix random_matrix(Eigen::Index n, std::mt19937_64& g, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(d(g), d(g));
  return m;
}
LevelMap random_map(Eigen::Index n, std::mt19937_64& g) {
  return {random_matrix(n, g, 0.3), random_matrix(n, g, 0.3), random_matrix(n, g, 0.3), random_matrix(n, g, 0.1)};
}
MeshConfig small_corner_mesh(int levels) {
  MeshConfig cfg;
  cfg.corner_levels = levels;
  return cfg;
}
}  // namespace

TEST_CASE("composed level maps act like sequential application") {
  std::mt19937_64 g(7);
  const LevelMap m1 = random_map(6, g), m2 = random_map(6, g);
  const CMatrix r = random_matrix(6, g, 0.3);
  const CMatrix seq = m2.apply(m1.apply(r));
  const CMatrix comp = compose(m1, m2).apply(r);
  CHECK((seq - comp).norm() < 1e-12 * seq.norm());
}

TEST_CASE("smooth curves reduce to plain Nystrom") {
  const BoundaryCurve c = make_ellipse(2.0, 1.0);
  MeshConfig cfg;
  auto coarse = coarse_mesh_for(c, cfg);
  const double t = 0.1, delta = 1e-3;
  CompressedSystem sys = build_compression(coarse, cfg, t, delta);
  CHECK(sys.corners.empty());
  const Density f = dipole_source(*coarse, {3.0, 1.0}, {1.0, 0.0});
  CompressedSolution sol = sys.solve(f.values);
  const Eigen::Index n = static_cast<Eigen::Index>(coarse->size());
  CMatrix a = cplx(t, delta) * CMatrix::Identity(n, n) - assemble_np(*coarse).a.cast<cplx>();
  CVector ref = a.partialPivLu().solve(f.values);
  CHECK((sol.rho_hat.col(0) - ref).norm() < 1e-11 * ref.norm());
}

TEST_CASE("zero data gives zero density") {
  const BoundaryCurve c = make_rectangle(2.0);
  const MeshConfig cfg = small_corner_mesh(20);
  CompressedSystem sys = build_compression(c, cfg, 0.3, 1e-4);
  CHECK(sys.corners.size() == 4);
  CompressedSolution sol = sys.solve(CMatrix::Zero(static_cast<Eigen::Index>(sys.coarse->size()), 1));
  CHECK(sol.rho_hat.norm() == 0.0);
}

TEST_CASE("truncated compression matches the graded brute force solve") {
  const BoundaryCurve c = make_rectangle(2.0);
  const MeshConfig cfg = small_corner_mesh(16);
  ResolventProblem both(c, cfg, SolverKind::Both);
  const std::vector<DipoleSource> src = source_ring(3.0, 4, 2);
  for (double t : {-0.3, 0.1}) {
    DipoleBatch b = both.dipole_norms(t, 1e-4, src);
    REQUIRE(b.norm_star_brute.size() == src.size());
    CHECK(b.solver_gap < 1e-9);
  }
}

TEST_CASE("reconstructed fine density keeps the coarse moments") {
  const BoundaryCurve c = make_isosceles_triangle(1.0, 2.0);
  const MeshConfig cfg = small_corner_mesh(12);
  CompressionOptions opts;
  opts.tail = CompressionOptions::Tail::Truncated;
  CompressedSystem sys = build_compression(c, cfg, -0.2, 1e-3, opts);
  const Density f = dipole_source(*sys.coarse, {0.5, 3.0}, {0.0, 1.0});
  CompressedSolution sol = sys.solve(f.values);
  auto fine = sys.fine_mesh();
  CVector phi = sys.reconstruct(sol);
  REQUIRE(static_cast<std::size_t>(phi.size()) == fine->size());
  cplx mc = 0.0, mf = 0.0;
  for (std::size_t j = 0; j < sys.coarse->size(); ++j)
    mc += sys.coarse->weight[j] * sys.coarse->x[j].x * sol.rho_hat(static_cast<Eigen::Index>(j), 0);
  for (std::size_t j = 0; j < fine->size(); ++j)
    mf += fine->weight[j] * fine->x[j].x * phi[static_cast<Eigen::Index>(j)];
  CHECK(std::abs(mc - mf) < 1e-10 * std::abs(mc));
}

TEST_CASE("self-similar tail converges") {
  const BoundaryCurve c = make_rectangle(1.0);
  CompressedSystem sys = build_compression(c, MeshConfig{}, 0.2, 1e-6);
  for (const CornerBlock& b : sys.corners) {
    CHECK(b.r.rows() == 64);
    CHECK((b.reused_from >= 0 || !b.tail_updates.empty()));
    if (b.reused_from < 0) CHECK(b.tail_updates.back() <= 1e-14);
  }
}

TEST_CASE("compression errors") {
  const BoundaryCurve c = make_rectangle(1.0);
  CHECK_THROWS_AS(build_compression(c, MeshConfig{}, 0.1, 0.0), ParameterError);
  CHECK_THROWS_AS(build_compression(c, MeshConfig{}, std::nan(""), 1e-3), ParameterError);
  CompressedSystem sys = build_compression(c, MeshConfig{}, 0.1, 1e-3);
  CHECK_THROWS_AS(sys.solve(CMatrix::Zero(3, 1)), ContractError);
  CHECK_THROWS_AS(sys.fine_mesh(), ContractError);
}

#include <cmath>

#include "doctest.h"
#include "npspec/oracles.hpp"
#include "npspec/resolvent.hpp"

using namespace npspec;

namespace {
// One source whose norms grow like delta^-rate(t).
template <class Rate>
IndicatorProfile synthetic(const std::vector<double>& ts, Rate rate) {
  IndicatorProfile p;
  p.t = ts;
  p.refined.assign(ts.size(), 0);
  p.deltas = {1e-4, 1e-6, 1e-8, 1e-10};
  p.sources = {{0, {3.0, 0.0}, {1.0, 0.0}}};
  for (double t : ts) {
    std::vector<double> norms;
    for (double d : p.deltas) {
      SpectralSample s;
      s.t = t;
      s.delta = d;
      s.norm_star = std::pow(d, -rate(t));
      s.alpha = alpha_of(s.norm_star, d);
      s.ok = true;
      norms.push_back(s.norm_star);
      p.samples.push_back(s);
    }
    p.alpha_rate.push_back(ladder_slope(p.deltas, norms, 3));
    p.alpha_sharp.push_back(p.samples.back().alpha);
    p.rate_source.push_back(0);
    p.mu.push_back(0.0);
  }
  return p;
}
std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}
}  // namespace

TEST_CASE("ladder slopes") {
  const std::vector<double> d{1e-4, 1e-6, 1e-8, 1e-10};
  std::vector<double> eig, ac, logc;
  for (double x : d) {
    eig.push_back(3.0 / x);
    ac.push_back(std::pow(x, -0.5));
    logc.push_back(std::pow(x, -0.5) * std::sqrt(std::abs(std::log(x))));
  }
  CHECK(ladder_slope(d, eig) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ladder_slope(d, ac, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ladder_slope(d, logc, 0, true) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ladder_slope(d, logc) > 0.52);
  CHECK_THROWS_AS(ladder_slope({1e-4}, {1.0}), ParameterError);
}

TEST_CASE("alpha of a zero norm") {
  bool zero = false;
  CHECK(alpha_of(0.0, 1e-6, &zero) == 0.0);
  CHECK(zero);
  CHECK(alpha_of(1e3, 1e-6, &zero) == doctest::Approx(0.5));
  CHECK_FALSE(zero);
}

TEST_CASE("source rings") {
  auto s = source_ring(2.0, 4, 3);
  REQUIRE(s.size() == 12);
  for (const auto& d : s) {
    CHECK(std::hypot(d.z.x, d.z.y) == doctest::Approx(2.0));
    CHECK(std::hypot(d.d.x, d.d.y) == doctest::Approx(1.0));
  }
  auto r1 = source_ring_random(2.0, 4, 3, 5), r2 = source_ring_random(2.0, 4, 3, 5);
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].d.x == r2[i].d.x);
}

TEST_CASE("dipole data has mean zero") {
  PanelMesh m = build_mesh(make_rectangle(2.0), MeshConfig{});
  double raw = 0.0;
  Density f = dipole_source(m, {0.3, 2.5}, {0.6, 0.8}, &raw);
  cplx mean = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) mean += m.weight[j] * f.values[static_cast<Eigen::Index>(j)];
  CHECK(std::abs(mean) < 1e-13);
  CHECK_THROWS(dipole_source(m, {0.1, 0.1}, {1.0, 0.0}));
}

TEST_CASE("classification of a synthetic profile") {
  // band on |t| < 0.2, eigenvalue at 0.35, resolvent elsewhere
  auto p = synthetic(grid(-0.45, 0.45, 91), [](double t) {
    if (std::abs(t - 0.35) < 1e-9) return 1.0;
    return std::abs(t) < 0.2 + 1e-9 ? 0.5 : 0.0;
  });
  SpectrumReport r = classify(p);
  REQUIRE(r.bands.size() == 1);
  CHECK(r.bands[0].lo == doctest::Approx(-0.2));
  CHECK(r.bands[0].hi == doctest::Approx(0.2));
  REQUIRE(r.eigenvalues.size() == 1);
  CHECK(r.eigenvalues[0].t == doctest::Approx(0.35));
  CHECK(r.eigenvalues[0].evidence.size() == 4);
  CHECK(r.embedded.empty());
  CHECK(r.unclassified.empty());
  CHECK(symmetry_defect(p) == doctest::Approx(1.0));
}

TEST_CASE("embedded eigenvalue inside a band") {
  auto p = synthetic(grid(-0.3, 0.3, 61), [](double t) {
    if (std::abs(std::abs(t) - 0.1) < 1e-9) return 1.0;
    return std::abs(t) < 0.25 + 1e-9 ? 0.5 : 0.0;
  });
  SpectrumReport r = classify(p);
  REQUIRE(r.bands.size() == 1);
  REQUIRE(r.embedded.size() == 2);
  CHECK(r.embedded[0].t == doctest::Approx(-0.1));
  CHECK(r.embedded[1].t == doctest::Approx(0.1));
  CHECK(symmetry_defect(p) < 1e-12);
}

TEST_CASE("symmetry needs mirrored points") {
  auto p = synthetic({0.1, 0.2, 0.3}, [](double) { return 0.0; });
  CHECK_THROWS_AS(symmetry_defect(p), ContractError);
}

TEST_CASE("ellipse polarization tensor") {
  ResolventProblem prob(make_ellipse(2.0, 1.0), MeshConfig{});
  for (double t : {-0.4, 0.05, 0.3}) {
    auto m = polarization_tensor(prob, t, 1e-3);
    auto ref = oracle::ellipse_pt(cplx(t, 1e-3), 2.0, 1.0);
    CHECK(std::abs(m(0, 0) - ref.m11) < 1e-10 * std::abs(ref.m11));
    CHECK(std::abs(m(1, 1) - ref.m22) < 1e-10 * std::abs(ref.m22));
    CHECK(std::abs(m(0, 1)) < 1e-10 * std::abs(ref.m11));
  }
}

TEST_CASE("ellipse eigenvalue found by a sweep") {
  // a/b = 3: eigenvalues +-1/4, +-1/16, ...
  ResolventProblem prob(make_ellipse(3.0, 1.0), MeshConfig{});
  auto p = sweep(prob, grid(0.2, 0.3, 11), {1e-4, 1e-6, 1e-8}, source_ring(4.0, 4, 2));
  SpectrumReport r = classify(p);
  REQUIRE(r.eigenvalues.size() == 1);
  CHECK(std::abs(r.eigenvalues[0].t - 0.25) < 1e-10);
  CHECK(r.bands.empty());
  MuEstimate mu = estimate_mu(p, 0.22);
  CHECK(mu.value < 1e-6);
}

TEST_CASE("solver arguments") {
  CHECK(solver_kind_from("brute") == SolverKind::Brute);
  CHECK(std::string(to_string(SolverKind::Both)) == "both");
  CHECK_THROWS(solver_kind_from("fast"));
}

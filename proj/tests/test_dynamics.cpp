#include <doctest.h>

#include "ricci/dynamics.hpp"

#include <cmath>
#include <random>

using namespace ricci;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MetricPoint feasible_from_y(const SpaceSpec& s, const Candidate& T, Vector y) {
  y /= trace_y(s, T, y);
  return MetricPoint::from_y(std::move(y));
}

Vector random_simplex_y(const SpaceSpec& s, const Candidate& T, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(0.2, 1.8);
  Vector y(s.rank());
  for (int i = 0; i < s.rank(); ++i) y[i] = u(eng);
  return y / trace_y(s, T, y);
}

}  // namespace

TEST_CASE("flow reaches the Wallach Einstein point from near the center") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1, 1, 1})};
  MetricPoint start = feasible_from_y(w, T, vec({1.0, 1.1, 0.95}));
  FlowResult fr = flow(w, T, start);
  REQUIRE(fr.converged());
  const auto& c = std::get<Converged>(fr.outcome);
  Vector x = c.point.as_x();
  for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - 6.0) <= 1e-8);
  CHECK(c.spectrum.co_index == 0);
  CHECK(c.s_value == doctest::Approx(5.0 / 12.0).epsilon(1e-10));
}

TEST_CASE("flow with the red-dot candidate lands on the critical curve") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.25, 0.25, 0.5})};
  // start near the Kaehler curve x3 = x1 + x2
  Vector x0 = vec({1.1, 0.9, 2.1});
  double tr = 0;
  for (int i = 0; i < 3; ++i) tr += w.dim(i) * T[i] / x0[i];
  x0 *= tr;
  FlowResult fr = flow(w, T, MetricPoint::from_x(x0));
  REQUIRE(fr.converged());
  const auto& c = std::get<Converged>(fr.outcome);
  CHECK(c.spectrum.degenerate);
  CHECK(c.spectrum.co_index == 0);
  Vector x = c.point.as_x();
  CHECK(std::abs(x[2] - x[0] - x[1]) <= 1e-6 * x[2]);  // on the curve
  CHECK(c.s_value == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("flow in a white region never converges") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.49, 0.49, 0.02})};
  std::mt19937_64 eng(67);
  int diverged = 0;
  for (int it = 0; it < 5; ++it) {
    MetricPoint start = MetricPoint::from_y(random_simplex_y(w, T, eng));
    FlowResult fr = flow(w, T, start);
    CHECK_FALSE(fr.converged());
    if (fr.diverged()) {
      ++diverged;
      const auto& d = std::get<Diverged>(fr.outcome);
      CHECK(d.stratum.kind == StratumKind::Subalgebra);
      REQUIRE(d.matched_alpha.has_value());
      CHECK(d.matched_alpha->second <= 1e-3 * (1 + std::abs(d.level)));
    }
  }
  // multistart Newton finds no feasible root either
  auto roots = newton_inventory(w, T, 128, 2024);
  CHECK(roots.empty());
  CHECK(diverged >= 1);
}

TEST_CASE("S is non-decreasing and the constraint is re-projected along the flow") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({1.6, 0.22, 1.0})};
  MetricPoint start = feasible_from_y(g2, T, vec({0.8, 1.0, 1.2}));
  double last_S = -1e300;
  bool monotone = true;
  double worst_tr = 0;
  TrajectorySink sink = [&](long, double, const Vector& y, double S, double) {
    if (S < last_S - 1e-12 * (1 + std::abs(last_S))) monotone = false;
    last_S = S;
    worst_tr = std::max(worst_tr, std::abs(trace_y(g2, T, y) - 1.0));
  };
  FlowResult fr = flow(g2, T, start, {}, sink);
  CHECK(monotone);
  CHECK(worst_tr <= 1e-10);
  REQUIRE(fr.converged());
}

TEST_CASE("converged flow satisfies |Ric - S T|_g within tolerance") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({1.6, 0.22, 1.0})};
  FlowParams params;
  params.newton_polish = false;  // the raw flow limit must already satisfy it
  MetricPoint start = feasible_from_y(g2, T, vec({1.0, 1.0, 1.0}));
  FlowResult fr = flow(g2, T, start, params);
  REQUIRE(fr.converged());
  const auto& c = std::get<Converged>(fr.outcome);
  Vector y = c.point.as_y();
  DiagTensor R = ricci_y(g2, y);
  DiagTensor res = R - c.s_value * T.components;
  CHECK(std::sqrt(inner_g_y(g2, res, res, y)) <= 10 * params.grad_tol);
}

TEST_CASE("newton refines flow results to the same point") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.32, 0.33, 0.35})};
  std::mt19937_64 eng(71);
  for (int it = 0; it < 5; ++it) {
    MetricPoint start = MetricPoint::from_y(random_simplex_y(w, T, eng));
    FlowResult fr = flow(w, T, start);
    if (!fr.converged()) continue;
    const auto& c = std::get<Converged>(fr.outcome);
    auto cm = newton_critical(w, T, c.point);
    REQUIRE(cm.has_value());
    CHECK((cm->point.as_x() - c.point.as_x()).norm() <= 1e-8 * c.point.as_x().norm());
  }
}

TEST_CASE("newton on the Wallach Einstein candidate and the c = S identity") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1, 1, 1})};
  auto cm = newton_critical(w, T, MetricPoint::from_x(vec({5, 7, 6.5})));
  REQUIRE(cm.has_value());
  Vector x = cm->point.as_x();
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(6.0).epsilon(1e-10));
  double S = scalar_curvature(w, cm->point);
  CHECK(cm->c == doctest::Approx(S).epsilon(1e-12));
  CHECK(cm->c == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("newton inventory on the g2 pink-triangle candidate finds max and saddle") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({8.0 / 5, 11.0 / 50, 1.0})};
  auto roots = newton_inventory(g2, T, 128, 7);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0].spectrum.co_index == 0);  // global maximum, sorted by S desc
  CHECK(roots[1].spectrum.co_index == 1);  // saddle
  CHECK_FALSE(roots[0].spectrum.degenerate);
  CHECK_FALSE(roots[1].spectrum.degenerate);
  CHECK(roots[0].c > roots[1].c);
}

TEST_CASE("newton inventory at the degenerate G2 endpoint finds one degenerate root") {
  SpaceSpec g2 = catalog("g2_u2");
  double s15 = std::sqrt(15.0);
  Candidate T{vec({(12 * s15 - 35) / (12 * s15 - 15), 106 * s15 / (36 * s15 - 45), 1.0})};
  auto roots = newton_inventory(g2, T, 128, 7);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0].spectrum.degenerate);
}

TEST_CASE("inventory is deterministic and thread-count independent") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({8.0 / 5, 11.0 / 50, 1.0})};
  auto a = newton_inventory(g2, T, 64, 99, 1);
  auto b = newton_inventory(g2, T, 64, 99, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK((a[k].point.as_x() - b[k].point.as_x()).norm() == 0.0);
}

TEST_CASE("divergence diagnosis on a canonical variation tail (g2)") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({1.0, 0.7, 1.3})};
  for (int stratum : {1, 2}) {
    IndexSet J = IndexSet::single(stratum);
    Vector fy(1);
    fy[0] = 1.0 / (g2.dim(stratum) * T[stratum]);
    auto comp = J.complement(3).members();
    double wsum = 0;
    for (int i : comp) wsum += g2.dim(i) * T[i];
    Vector by(2);
    by[0] = by[1] = 1.0 / wsum;
    CanonicalVariation cv = canonical_variation(g2, T, J, fy, by);
    std::vector<Vector> tail;
    for (double t = 1e-1; t >= 0.9e-6; t *= 0.8) {
      Vector y = cv.point(t).as_y();
      tail.push_back(y / trace_y(g2, T, y));
    }
    Diverged d = diagnose_divergence(g2, T, tail);
    CHECK(d.stratum.members == J);
    CHECK(d.kind == DivergenceKind::SubalgebraLimit);
    double expect_alpha = alpha(g2, T, J).value;
    CHECK(std::abs(d.level - expect_alpha) <= 1e-6 * (1 + std::abs(expect_alpha)));
    CHECK(d.ps_residual <= 1e-6);
    REQUIRE(d.matched_alpha.has_value());
    CHECK(d.matched_alpha->first == J);
    // no toral stratum on the catalog spaces: levels stay away from zero
    CHECK(d.level > 0.05);
  }
}

TEST_CASE("the non-canonical Wallach curve is still diagnosed as divergent") {
  // g(a) = (x1(a), sqrt(b a + a^2), a) with b = 1 and tr_g T = 1
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1, 1, 1})};
  std::vector<Vector> tail;
  for (double a = 8.0; a <= 3.2e6; a *= 1.3) {
    double x2 = std::sqrt(a + a * a);
    // solve 2T1/x1 = 1 - 2T2/x2 - 2T3/a
    double rest = 1.0 - 2 * T[1] / x2 - 2 * T[2] / a;
    REQUIRE(rest > 0);
    double x1 = 2 * T[0] / rest;
    Vector y(3);
    y[0] = 1 / x1;
    y[1] = 1 / x2;
    y[2] = 1 / a;
    tail.push_back(y);
  }
  // not affine in the y-chart (not a canonical variation): the middle
  // coordinate bends against the third
  {
    const Vector &p = tail[0], &q = tail[tail.size() / 2], &r = tail.back();
    double lam = (q[2] - p[2]) / (r[2] - p[2]);
    double interp = (1 - lam) * p[1] + lam * r[1];
    CHECK(std::abs(q[1] - interp) > 1e-6);
  }
  Diverged d = diagnose_divergence(w, T, tail);
  CHECK(d.stratum.members == IndexSet::single(0));
  double a1 = alpha(w, T, IndexSet::single(0)).value;
  CHECK(std::abs(d.level - a1) <= 1e-4 * (1 + a1));
  CHECK(d.ps_residual <= 1e-5);
}

TEST_CASE("anomalous divergence toward an infinity stratum is flagged") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1, 1, 1})};
  // synthetic tail heading to the (infinity) edge {1,2}: y3 -> 0 only
  std::vector<Vector> tail;
  for (double e = 1e-2; e >= 0.9e-7; e *= 0.5) {
    Vector y = vec({0.2, 0.2, e});
    tail.push_back(y / trace_y(w, T, y));
  }
  Diverged d = diagnose_divergence(w, T, tail);
  CHECK(d.kind == DivergenceKind::InfinityAnomaly);
  CHECK(d.stratum.kind == StratumKind::Infinity);
}

TEST_CASE("flow reports a stall when the step budget is starved") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1, 1, 1})};
  FlowParams p;
  p.max_steps = 3;
  MetricPoint start = feasible_from_y(w, T, vec({1.0, 1.2, 0.8}));
  FlowResult fr = flow(w, T, start, p);
  CHECK(fr.stalled());
}

#include <doctest.h>

#include "ricci/mountainpass.hpp"

#include <cmath>

using namespace ricci;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Saddle level for wallach_su3 with T = (a, a, b): critical points on the
// symmetric locus x = (u, u, r u) equate R1/T1 = R3/T3 with
// R1 = 1/2 - r/12 and R3 = 1/2 + (r^2 - 2)/12, giving
//   a r^2 + b r + 4a - 6b = 0,   c = R1 / a.
double wallach_symmetric_saddle_level(double a, double b) {
  double A = a, B = b, C = 4 * a - 6 * b;
  double disc = B * B - 4 * A * C;
  REQUIRE(disc > 0);
  double r = (-B + std::sqrt(disc)) / (2 * A);
  REQUIRE(r > 0);
  return (0.5 - r / 12.0) / a;
}

}  // namespace

TEST_CASE("theorem-B path on wallach_su3 at T=(0.15,0.15,0.7)") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.15, 0.15, 0.7})};
  PathState path = build_path_wallach(w, T);
  CHECK(path.nodes.size() == 201);
  // alpha levels: a1 = a2 = 20/9, a3 = 1/2.1; bracket = (a3, a2)
  CHECK(path.bracket.first == doctest::Approx(1.0 / 2.1).epsilon(1e-12));
  CHECK(path.bracket.second == doctest::Approx(20.0 / 9.0).epsilon(1e-12));
  CHECK(path.c_estimate > path.bracket.first);
  // all nodes feasible
  for (const Vector& n : path.nodes)
    CHECK(std::abs(trace_y(w, T, n) - 1.0) <= 1e-12);
}

TEST_CASE("theorem-B path refuses the global-max regime") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({1.0 / 3, 1.0 / 3, 1.0 / 3})};
  CHECK_THROWS_WITH_AS((void)build_path_wallach(w, T),
                       doctest::Contains("negative derivatives"), hypothesis_error);
}

TEST_CASE("relax raises c monotonically into the bracket and the saddle extracts") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.15, 0.15, 0.7})};
  PathState path = build_path_wallach(w, T);
  double prev_c = path.c_estimate;
  bool monotone = true;
  RelaxSink sink = [&](int, double, int, double c) {
    if (c < prev_c - 1e-15) monotone = false;
    prev_c = c;
  };
  RelaxOptions opts;
  path = relax(w, T, std::move(path), opts, sink);
  CHECK(monotone);
  CHECK(path.c_estimate > path.bracket.first + 1e-6);
  CHECK(path.c_estimate < path.bracket.second - 1e-6);

  auto saddle = extract_saddle(w, T, path);
  REQUIRE(saddle.has_value());
  CHECK(saddle->spectrum.co_index == 1);
  CHECK_FALSE(saddle->spectrum.degenerate);
  double expect = wallach_symmetric_saddle_level(0.15, 0.7);
  CHECK(saddle->s_value == doctest::Approx(expect).epsilon(1e-8));
  CHECK(saddle->s_value > path.bracket.first);
  CHECK(saddle->s_value < path.bracket.second);
}

TEST_CASE("theorem-C path on g2_u2 in the pink triangle") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({8.0 / 5, 11.0 / 50, 1.0})};
  // alpha3 = 3/8 < alpha2 = 25/66, beta3 = 125/342 < alpha3
  PathState path = build_path_flag(g2, T, IndexSet::single(2));
  CHECK(path.nodes.size() == 201);
  CHECK(path.bracket.second == doctest::Approx(3.0 / 8.0).epsilon(1e-12));

  RelaxOptions opts;
  path = relax(g2, T, std::move(path), opts);
  CHECK(path.c_estimate < 25.0 / 66.0);  // cannot pass the higher neck

  auto saddle = extract_saddle(g2, T, path);
  REQUIRE(saddle.has_value());
  CHECK(saddle->spectrum.co_index == 1);
  // distinct from the global max found by the inventory
  auto roots = newton_inventory(g2, T, 128, 7);
  REQUIRE(roots.size() == 2);
  CHECK((saddle->point.as_x() - roots[1].point.as_x()).norm() <=
        1e-6 * roots[1].point.as_x().norm());
  CHECK((saddle->point.as_x() - roots[0].point.as_x()).norm() >
        1e-2 * roots[0].point.as_x().norm());
}

TEST_CASE("theorem-C hypotheses fail at the first G2 blue dot") {
  SpaceSpec g2 = catalog("g2_u2");
  Candidate T{vec({0.2, 44.0 / 15, 1.0})};
  // alpha2 = 1/(12 T2) is tiny, alpha3 = 3/8; k_low = {2}; beta2 - alpha2 > 0
  CHECK_THROWS_AS((void)build_path_flag(g2, T, IndexSet::single(1)), hypothesis_error);
  // and {3} is not minimal
  CHECK_THROWS_AS((void)build_path_flag(g2, T, IndexSet::single(2)), hypothesis_error);
}

TEST_CASE("theorem-C path anchors at {4} on f4 under collection (2)") {
  SpaceSpec f4 = catalog("f4_u3su2");
  // genuine collection-(2) point: T3 <= 3/8, 7(3T1+T3) >= 36 T2, T2 > 7/4
  Candidate T{vec({4.0, 2.0, 0.25, 1.0})};
  PathState path = build_path_flag(f4, T, IndexSet::single(3));
  CHECK(path.nodes.size() == 201);
  // bracket tops at alpha4 = 2/9
  CHECK(path.bracket.second == doctest::Approx(2.0 / 9.0).epsilon(1e-9));
  for (const Vector& n : path.nodes)
    CHECK(std::abs(trace_y(f4, T, n) - 1.0) <= 1e-10);
}

TEST_CASE("path endpoints approach their anchored alpha levels") {
  SpaceSpec w = catalog("wallach_su3");
  Candidate T{vec({0.15, 0.15, 0.7})};
  PathOptions opts;
  opts.anchor_distance = 1e-5;
  PathState path = build_path_wallach(w, T, opts);
  double S_front = scalar_curvature_y(w, path.nodes.front());
  double S_back = scalar_curvature_y(w, path.nodes.back());
  // both endpoints anchor at alpha = 20/9 strata
  CHECK(std::abs(S_front - 20.0 / 9.0) <= 1e-3 * (1 + 20.0 / 9.0));
  CHECK(std::abs(S_back - 20.0 / 9.0) <= 1e-3 * (1 + 20.0 / 9.0));
}

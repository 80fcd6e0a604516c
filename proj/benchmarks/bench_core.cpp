#include <benchmark/benchmark.h>

#include "ricci/classify.hpp"
#include "ricci/dynamics.hpp"
#include "ricci/invariants.hpp"
#include "ricci/space.hpp"

using namespace ricci;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

const SpaceSpec& wallach() {
  static SpaceSpec s = catalog("wallach_su3");
  return s;
}

const SpaceSpec& f4() {
  static SpaceSpec s = catalog("f4_u3su2");
  return s;
}

void BM_scalar_curvature(benchmark::State& state) {
  const SpaceSpec& s = state.range(0) == 3 ? wallach() : f4();
  Vector x = Vector::LinSpaced(s.rank(), 0.5, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(scalar_curvature_x(s, x));
}
BENCHMARK(BM_scalar_curvature)->Arg(3)->Arg(4);

void BM_ricci(benchmark::State& state) {
  const SpaceSpec& s = state.range(0) == 3 ? wallach() : f4();
  Vector x = Vector::LinSpaced(s.rank(), 0.5, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(ricci_x(s, x));
}
BENCHMARK(BM_ricci)->Arg(3)->Arg(4);

void BM_jacobian(benchmark::State& state) {
  const SpaceSpec& s = state.range(0) == 3 ? wallach() : f4();
  Vector x = Vector::LinSpaced(s.rank(), 0.5, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(jacobian_dric_x(s, x));
}
BENCHMARK(BM_jacobian)->Arg(3)->Arg(4);

void BM_newton_critical(benchmark::State& state) {
  const SpaceSpec& s = wallach();
  Candidate T{vec3(1, 1, 1)};
  Vector x0 = vec3(5, 7, 6.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_critical(s, T, x0));
}
BENCHMARK(BM_newton_critical);

void BM_flow_to_einstein(benchmark::State& state) {
  const SpaceSpec& s = wallach();
  Candidate T{vec3(1, 1, 1)};
  Vector y = vec3(1.0, 1.1, 0.95);
  y /= trace_y(s, T, y);
  MetricPoint start = MetricPoint::from_y(y);
  for (auto _ : state) benchmark::DoNotOptimize(flow(s, T, start));
}
BENCHMARK(BM_flow_to_einstein);

void BM_alpha_two_module_fiber(benchmark::State& state) {
  const SpaceSpec& s = f4();
  Vector t(4);
  t << 1.0, 0.8, 1.2, 0.9;
  Candidate T{t};
  IndexSet J = IndexSet::of({1, 3});
  for (auto _ : state) benchmark::DoNotOptimize(alpha(s, T, J));
}
BENCHMARK(BM_alpha_two_module_fiber);

void BM_region_label(benchmark::State& state) {
  const SpaceSpec& s = f4();
  Vector t(4);
  t << 1.0, 0.8, 1.2, 0.9;
  Candidate T{t};
  for (auto _ : state) benchmark::DoNotOptimize(region_label(s, T));
}
BENCHMARK(BM_region_label);

void BM_image_sample_10k(benchmark::State& state) {
  const SpaceSpec& s = wallach();
  for (auto _ : state)
    benchmark::DoNotOptimize(ricci_image_sample(s, 10000, 0.1, 10.0, 42, true, 1));
}
BENCHMARK(BM_image_sample_10k)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <vector>

#include <benchmark/benchmark.h>

#include "berry/chaos2.hpp"
#include "berry/cov_theory.hpp"
#include "berry/field.hpp"
#include "berry/geometry.hpp"
#include "berry/nodal.hpp"
#include "berry/special_functions.hpp"

using namespace berry;

namespace {

void BM_BesselJ01(benchmark::State& state) {
  const double x0 = static_cast<double>(state.range(0));
  double x = x0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::bessel_j01(x));
    x += 1e-3;
    if (x > x0 + 10) x = x0;
  }
}
BENCHMARK(BM_BesselJ01)->Arg(1)->Arg(10)->Arg(100)->Arg(10000);

void BM_FieldTensor(benchmark::State& state) {
  const double E = static_cast<double>(state.range(0));
  const auto f = PlaneWaveField::sample(E, default_n_waves(E), 1, 0);
  const GridSpec g = make_grid(RectDomain::unit(), E, 10);
  const auto xs = g.xs();
  const auto ys = g.ys();
  for (auto _ : state) benchmark::DoNotOptimize(f.eval_tensor(xs, ys).sum());
  state.counters["points"] = static_cast<double>(xs.size() * ys.size());
}
BENCHMARK(BM_FieldTensor)->Arg(100)->Arg(1000)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_FieldPoint(benchmark::State& state) {
  const auto f = PlaneWaveField::sample(1000, default_n_waves(1000), 1, 0);
  double t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.eval({t, 0.5}));
    t += 1e-4;
  }
}
BENCHMARK(BM_FieldPoint);

void BM_ExtractNodal(benchmark::State& state) {
  const double E = static_cast<double>(state.range(0));
  const auto f = PlaneWaveField::sample(E, default_n_waves(E), 2, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_nodal(f, RectDomain::unit(), 10).total_length);
}
BENCHMARK(BM_ExtractNodal)->Arg(100)->Arg(1000)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_PhiBoundary(benchmark::State& state) {
  const double E = static_cast<double>(state.range(0));
  const auto f = PlaneWaveField::sample(E, default_n_waves(E), 3, 0);
  const auto c = rect_boundary_chain(RectDomain::unit());
  for (auto _ : state) benchmark::DoNotOptimize(phi_boundary(f, c).raw);
}
BENCHMARK(BM_PhiBoundary)->Arg(500)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ExactCovSegments(benchmark::State& state) {
  const double E = static_cast<double>(state.range(0));
  const OrientedSegment s1({0, 0}, 0.0, 1.0);
  const OrientedSegment s2({0.2, 0.1}, 1.0, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(exact_cov_segments(s1, s2, E));
}
BENCHMARK(BM_ExactCovSegments)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ATerm(benchmark::State& state) {
  const double E = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(a_term(1.0, 0.8, 1.0, E));
}
BENCHMARK(BM_ATerm)->Arg(100)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();

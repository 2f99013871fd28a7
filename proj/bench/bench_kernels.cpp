// OpenMP kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <vector>

#include "fractal_lab/brownian.hpp"
#include "fractal_lab/geom.hpp"
#include "fractal_lab/loewner.hpp"
#include "fractal_lab/rng.hpp"

namespace fl = fractal_lab;

namespace {

fl::Driver sle_driver(benchmark::State& state) {
  return fl::drive_brownian(2.0, 1.0, 1.0 / static_cast<double>(state.range(0)), 7, fl::Geometry::Chordal);
}

void BM_ChordalTrace(benchmark::State& state) {
  const auto d = sle_driver(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::chordal_trace(d));
}

void BM_ChordalTraceReference(benchmark::State& state) {
  const auto d = sle_driver(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::reference::chordal_trace(d));
}

fl::PolyCurve bm_trace(benchmark::State& state) {
  return fl::trace_curve(fl::sample_bm(2, static_cast<int>(state.range(0)), 1.0, 11));
}

void BM_Turning(benchmark::State& state) {
  const auto c = bm_trace(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::turning_constant(c));
}

void BM_TurningReference(benchmark::State& state) {
  const auto c = bm_trace(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::reference::turning_constant(c));
}

void BM_Diameter(benchmark::State& state) {
  const auto c = bm_trace(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::point_set_diameter(c.points()));
}

void BM_DiameterReference(benchmark::State& state) {
  const auto c = bm_trace(state);
  for (auto _ : state) benchmark::DoNotOptimize(fl::reference::point_set_diameter(c.points(), 0, c.size()));
}

void BM_DyadicScan(benchmark::State& state) {
  const auto p = fl::sample_bm(2, 18, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fl::dyadic_event_scan(p, 3.0, static_cast<int>(state.range(0))));
}

void BM_DyadicScanReference(benchmark::State& state) {
  const auto p = fl::sample_bm(2, 18, 1.0, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(fl::reference::dyadic_event_scan(p, 3.0, static_cast<int>(state.range(0))));
}

void BM_FillGaussian(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    fl::fill_gaussian(out, 5, 1.0);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FillGaussianReference(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    fl::reference::fill_gaussian(out, 5, 1.0);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ChordalTrace)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChordalTraceReference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Turning)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TurningReference)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Diameter)->Arg(12)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DiameterReference)->Arg(12)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DyadicScan)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DyadicScanReference)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FillGaussian)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_FillGaussianReference)->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();

// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ambient/beamformer.hpp"
#include "ambient/lof.hpp"
#include "ambient/mixer_doppler.hpp"
#include "ambient/scenario.hpp"

namespace {

using namespace ambient;

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_BasebandSeries(benchmark::State& state) {
  const auto sc = preset("reference");
  const auto cfg = sc.ofdm_config();
  const auto count = static_cast<std::size_t>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(baseband_series(cfg, sc.scene, sc.run.sample_rate_hz, 0.0, count, {}, exec_of(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
  label(state);
}
BENCHMARK(BM_BasebandSeries)->Args({0, 2000})->Args({1, 2000})->Unit(benchmark::kMillisecond);

void BM_BeamformDifferences(benchmark::State& state) {
  const auto sc = preset("reference");
  const auto geom = sc.geometry();
  const auto grid = sc.grid();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> deltas(geom.rx_positions.size());
  for (auto& d : deltas) d = Complex(g(rng), g(rng));
  const auto exec = exec_of(state);
  // The parallel path reads a precomputed table; building it is a one-off per run.
  const SteeringTable table(geom, grid);
  const SteeringTable* tp = exec == Exec::Parallel ? &table : nullptr;
  for (auto _ : state) benchmark::DoNotOptimize(beamform_differences(deltas, geom, grid, exec, tp));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.cells()));
  label(state);
}
BENCHMARK(BM_BeamformDifferences)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LofScores(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> pts(static_cast<std::size_t>(state.range(1)));
  for (auto& p : pts) p = Complex(g(rng), g(rng));
  for (auto _ : state) benchmark::DoNotOptimize(lof_scores(pts, 20, exec_of(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
  label(state);
}
BENCHMARK(BM_LofScores)->Args({0, 500})->Args({1, 500})->Args({0, 5000})->Args({1, 5000})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

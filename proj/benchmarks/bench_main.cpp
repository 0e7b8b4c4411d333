#include <benchmark/benchmark.h>

#include "phenosample/eval/knn.hpp"
#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"
#include "phenosample/raster.hpp"
#include "phenosample/rng.hpp"
#include "phenosample/synthetic.hpp"

namespace ps = phenosample;
namespace ev = phenosample::eval;

static void BM_GenerateGlobalGrid(benchmark::State& state) {
  const auto land = ps::Raster::filled(-90.0, -180.0, 1.0, 1.0, 180, 360, 1.0f);
  const ps::GridSpec spec{static_cast<double>(state.range(0))};
  std::size_t points = 0;
  for (auto _ : state) {
    const auto grid = ps::generate_grid(spec, land);
    points = grid.size();
    benchmark::DoNotOptimize(grid.data());
  }
  state.counters["points"] = static_cast<double>(points);
}
BENCHMARK(BM_GenerateGlobalGrid)->Arg(100)->Arg(23)->Unit(benchmark::kMillisecond);

static void BM_DetectTransitions(benchmark::State& state) {
  ps::Pcg64 rng(1);
  std::vector<ps::EviCurve> curves;
  for (int i = 0; i < 256; ++i) curves.push_back(ps::synth_evi(ps::random_double_logistic(rng), 2021));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ps::detect_transitions(curves[i++ % curves.size()]));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_DetectTransitions);

static void BM_FillMissing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ps::Pcg64 rng(2);
  std::vector<ps::GeoPoint> pts;
  ps::PhenoTable known;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({static_cast<std::int64_t>(i), rng.uniform() * 140.0 - 60.0, rng.uniform() * 360.0 - 180.0});
    if (rng.uniform() >= 0.3) known[static_cast<std::int64_t>(i)] = {100, 160, 250, 310};
  }
  for (auto _ : state) benchmark::DoNotOptimize(ps::fill_missing(pts, known));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FillMissing)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_KnnPredict(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ps::Pcg64 rng(3);
  ev::Matrix train(n, 128), queries(256, 128), labels(n, 10);
  for (double& v : train.data) v = rng.uniform() - 0.5;
  for (double& v : queries.data) v = rng.uniform() - 0.5;
  for (std::size_t i = 0; i < n; ++i) labels(i, rng.bounded(10)) = 1.0;
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 10);
  const ev::KnnIndex index(train, labels);
  for (auto _ : state) benchmark::DoNotOptimize(index.predict(queries, 20, 0.07, task));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * queries.rows));
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

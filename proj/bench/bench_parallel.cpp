#include <benchmark/benchmark.h>

#include "parsim/life.hpp"
#include "parsim/network.hpp"
#include "parsim/traffic.hpp"

using namespace parsim;

namespace {

void BM_LifeSerial(benchmark::State& state) {
  life::LifeConfig cfg;
  cfg.L = state.range(0);
  cfg.maxstep = 20;
  cfg.rho = 0.49;
  for (auto _ : state) {
    auto r = life::run_life(cfg, life::Mode::serial);
    benchmark::DoNotOptimize(r.live_history.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.L * cfg.L * cfg.maxstep);
}

void BM_LifeParallel(benchmark::State& state) {
  life::LifeConfig cfg;
  cfg.L = state.range(0);
  cfg.maxstep = 20;
  cfg.rho = 0.49;
  const auto p = static_cast<int>(state.range(1));
  cfg.dims = {p, 1};
  for (auto _ : state) {
    auto r = life::run_life(cfg, life::Mode::parallel);
    benchmark::DoNotOptimize(r.live_history.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.L * cfg.L * cfg.maxstep);
}

void BM_Traffic(benchmark::State& state, actor::ExecutionMode mode) {
  network::GeneratorOptions g;
  g.junctions = static_cast<std::size_t>(state.range(0));
  g.roads = g.junctions * 2;
  g.seed = 7;
  const network::RoadNetwork net = network::generate_network(g);
  traffic::TrafficConfig cfg;
  cfg.max_minutes = 5;
  cfg.spawn_per_minute = state.range(0);
  traffic::SimOptions opts;
  opts.mode = mode;
  opts.shards = static_cast<std::uint32_t>(state.range(1));
  for (auto _ : state) {
    traffic::TrafficSimulation sim(net, cfg, opts);
    auto r = sim.run();
    benchmark::DoNotOptimize(r.stats.totals.vehicles_added);
  }
}

}  // namespace

BENCHMARK(BM_LifeSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LifeParallel)->Args({256, 2})->Args({256, 4})->Args({1024, 2})->Args({1024, 4})
    ->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Traffic, deterministic, actor::ExecutionMode::deterministic)
    ->Args({50, 1})->Args({50, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Traffic, parallel, actor::ExecutionMode::parallel)
    ->Args({50, 2})->Args({50, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "evolab/admiss/gamma.hpp"
#include "evolab/evofam/evolution.hpp"
#include "evolab/evofam/expm.hpp"
#include "evolab/models/models.hpp"
#include "evolab/perturb/perturb.hpp"

using namespace evolab;

namespace {

models::Bundle heat(int n, double dt) {
  models::ModelConfig c;
  c.kind = models::ModelKind::HeatPoint;
  c.n = n;
  c.dt = dt;
  return models::build_bundle(c);
}

}  // namespace

static void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) m.col(j) = opalg::gaussian_vector(n, 1, j);
  for (auto _ : state) benchmark::DoNotOptimize(evofam::expm(m));
}
BENCHMARK(BM_Expm)->Arg(8)->Arg(32)->Arg(128);

static void BM_Propagate(benchmark::State& state) {
  auto b = heat(static_cast<int>(state.range(0)), 1.0 / 1024);
  for (auto _ : state) benchmark::DoNotOptimize(evofam::propagate(b.a, b.t_grid, b.scheme));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(b.t_grid.size() - 1));
}
BENCHMARK(BM_Propagate)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Volterra(benchmark::State& state) {
  auto b = heat(static_cast<int>(state.range(0)), 1.0 / 256);
  auto u = evofam::propagate(b.a, b.t_grid, b.scheme);
  for (auto _ : state) benchmark::DoNotOptimize(perturb::volterra_solve(u, *b.p));
}
BENCHMARK(BM_Volterra)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_GammaExact(benchmark::State& state) {
  auto b = heat(static_cast<int>(state.range(0)), 1.0 / 1024);
  auto u = evofam::propagate(b.a, b.t_grid, b.scheme);
  for (auto _ : state) benchmark::DoNotOptimize(admiss::gamma_evolution(u, b.c, 2.0, 0.0, b.tau_prime));
}
BENCHMARK(BM_GammaExact)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_GammaProbe(benchmark::State& state) {
  auto b = heat(32, 1.0 / 512);
  auto u = evofam::propagate(b.a, b.t_grid, b.scheme);
  auto opts = admiss::default_gamma_probes(0);
  opts.probes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(admiss::gamma_evolution(u, b.c, 1.5, 0.0, b.tau_prime, opts));
}
BENCHMARK(BM_GammaProbe)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "svk/mittag_leffler.hpp"
#include "svk/monte_carlo.hpp"
#include "svk/products.hpp"
#include "svk/resolvents.hpp"
#include "svk/solvers.hpp"

using namespace svk;

namespace {

Layout layout_arg(int64_t v) { return v ? Layout::train : Layout::dense; }

void BM_StarProduct(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)), layout_arg(state.range(1)));
  std::mt19937_64 rng(1);
  const StarKernel k = random_star(g, 3, 1, rng);
  const ChaosProcess x = random_process(g, 3, 1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(star(k, x));
}
BENCHMARK(BM_StarProduct)->ArgsProduct({{16, 32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_AstProduct(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)), layout_arg(state.range(1)));
  std::mt19937_64 rng(2);
  const AstKernel j = random_ast(g, 3, 1, rng);
  const ChaosProcess x = random_process(g, 3, 1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ast(j, x));
}
BENCHMARK(BM_AstProduct)->ArgsProduct({{16, 32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_GaussianStar(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)), Layout::train);
  const DetKernel k2 = tabulate_fractional(0.75, 0.4, g);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_star(k2, 6));
}
BENCHMARK(BM_GaussianStar)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_AstResolventFractional(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)));
  const AstKernel j({tabulate_fractional(0.75, 0.8, g)});
  for (auto _ : state) benchmark::DoNotOptimize(ast_resolvent(j));
}
BENCHMARK(BM_AstResolventFractional)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_SolveFractionalBS(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)), Layout::train);
  const BuiltSystem b = build_fractional_bs(0.75, 0.5, 0.3, 1.0, g, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_svie(b.sys, b.phi));
}
BENCHMARK(BM_SolveFractionalBS)->ArgsProduct({{64, 128, 256}, {3, 5}})->Unit(benchmark::kMillisecond);

void BM_DualityRandom(benchmark::State& state) {
  const Grid g = build_grid(0, 1, static_cast<int>(state.range(0)));
  std::mt19937_64 rng(3);
  const LinearSystem sys = random_system(g, 3, 2, rng);
  const ChaosProcess phi = random_process(g, 3, 2, 1, rng), psi = random_process(g, 3, 2, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(duality_gap(sys, phi, psi));
}
BENCHMARK(BM_DualityRandom)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const Grid g = build_grid(0, 1, 128, Layout::train);
  const BuiltSystem b = build_fractional_bs(0.75, 0.5, 0.3, 1.0, g, 4);
  const ChaosProcess x = solve_svie(b.sys, b.phi);
  const PathBatch batch = simulate_paths(g, 2, state.range(0), 7);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(x, batch, g.m() - 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reconstruct)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_EulerFractional(benchmark::State& state) {
  const Grid g = build_grid(0, 1, 128);
  const PathBatch batch = simulate_paths(g, 2, state.range(0), 7);
  const EulerSystem e = euler_fractional_bs(0.75, 0.5, 0.3, 1.0, batch.step_h());
  for (auto _ : state) benchmark::DoNotOptimize(euler_svie(e, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EulerFractional)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_MittagLeffler(benchmark::State& state) {
  double z = -3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ml({0.75, 0.75}, z));
    z = z < 3 ? z + 1e-3 : -3;
  }
}
BENCHMARK(BM_MittagLeffler);

}  // namespace

BENCHMARK_MAIN();
